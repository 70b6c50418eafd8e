"""Tokenizer for the SQL subset and the workload script commands."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import SqlSyntaxError
from .values import parse_literal_text

KEYWORDS = {
    "SELECT", "FROM", "WHERE", "UPDATE", "SET", "INSERT", "INTO", "VALUES",
    "DELETE", "CASE", "WHEN", "THEN", "ELSE", "END", "AND", "OR", "NOT",
    "AS", "OF", "NULL", "ROWID", "UNION", "ALL",
    "BEGIN", "COMMIT", "ABORT", "ISOLATION", "LEVEL", "SNAPSHOT", "READ",
    "COMMITTED", "CREATE", "TABLE", "INT", "DEC", "TEXT",
    "PROVENANCE", "TRANSACTION",
}

SYMBOLS = ("<=", ">=", "!=", "<", ">", "=", "+", "-", "*", "/", "(", ")",
           ",", ";", ".")


@dataclass(frozen=True)
class Token:
    kind: str  # KEYWORD | IDENT | NUMBER | STRING | PARAM | SYMBOL | EOF
    text: str
    value: object
    line: int
    column: int


def tokenize(sql: str, line_offset: int = 0) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(sql)

    def error(msg):
        raise SqlSyntaxError(msg, line + line_offset, col)

    while i < n:
        ch = sql[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if sql.startswith("--", i):
            while i < n and sql[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch == "'":
            j = i + 1
            out = []
            while True:
                if j >= n:
                    error("unterminated string literal")
                if sql[j] == "'":
                    if j + 1 < n and sql[j + 1] == "'":
                        out.append("'")
                        j += 2
                        continue
                    j += 1
                    break
                out.append(sql[j])
                j += 1
            text = sql[i:j]
            tokens.append(Token("STRING", text, "".join(out), line + line_offset, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and (sql[j].isdigit() or sql[j] == "."):
                j += 1
            text = sql[i:j]
            if text.count(".") > 1:
                error(f"bad numeric literal {text!r}")
            tokens.append(Token("NUMBER", text, parse_literal_text(text),
                                line + line_offset, start_col))
            col += j - i
            i = j
            continue
        if ch == ":":
            j = i + 1
            while j < n and (sql[j].isalnum() or sql[j] == "_"):
                j += 1
            if j == i + 1:
                error("':' must introduce a parameter name")
            text = sql[i:j]
            tokens.append(Token("PARAM", text, text.lower(), line + line_offset, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (sql[j].isalnum() or sql[j] == "_"):
                j += 1
            text = sql[i:j]
            upper = text.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KEYWORD", upper, upper, line + line_offset, start_col))
            else:
                tokens.append(Token("IDENT", text, text.lower(), line + line_offset, start_col))
            col += j - i
            i = j
            continue
        matched = False
        for sym in SYMBOLS:
            if sql.startswith(sym, i):
                tokens.append(Token("SYMBOL", sym, sym, line + line_offset, start_col))
                i += len(sym)
                col += len(sym)
                matched = True
                break
        if not matched:
            error(f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", None, line + line_offset, col))
    return tokens
