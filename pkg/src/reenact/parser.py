"""Recursive-descent parser for the SQL subset."""
from __future__ import annotations

from .errors import SqlSyntaxError
from .lexer import Token, tokenize
from .sqlast import (
    BinOp, CaseExpr, ColRef, DerivedTable, Delete, Insert, Literal, Param,
    ProvenanceRequest, RowidRef, Select, SelectItem, TableRef, Unary, Update,
    ValuesSource,
)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.text in words

    def at_symbol(self, sym: str) -> bool:
        tok = self.peek()
        return tok.kind == "SYMBOL" and tok.text == sym

    def accept_keyword(self, *words: str) -> Token | None:
        if self.at_keyword(*words):
            return self.advance()
        return None

    def accept_symbol(self, sym: str) -> Token | None:
        if self.at_symbol(sym):
            return self.advance()
        return None

    def expect_keyword(self, *words: str) -> Token:
        tok = self.peek()
        if tok.kind != "KEYWORD" or tok.text not in words:
            self.error(f"unexpected {tok.text or 'end of input'!r}", expected=words)
        return self.advance()

    def expect_symbol(self, sym: str) -> Token:
        tok = self.peek()
        if tok.kind != "SYMBOL" or tok.text != sym:
            self.error(f"unexpected {tok.text or 'end of input'!r}", expected=(sym,))
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok.kind != "IDENT":
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.advance().value

    def error(self, message: str, expected: tuple = ()):
        tok = self.peek()
        raise SqlSyntaxError(message, tok.line, tok.column,
                             tuple(str(e) for e in expected))

    # -- expressions ----------------------------------------------------------

    def parse_expr(self):
        return self._or_expr()

    def _or_expr(self):
        left = self._and_expr()
        while self.accept_keyword("OR"):
            left = BinOp("OR", left, self._and_expr())
        return left

    def _and_expr(self):
        left = self._not_expr()
        while self.accept_keyword("AND"):
            left = BinOp("AND", left, self._not_expr())
        return left

    def _not_expr(self):
        if self.accept_keyword("NOT"):
            return Unary("NOT", self._not_expr())
        return self._cmp_expr()

    def _cmp_expr(self):
        left = self._add_expr()
        tok = self.peek()
        if tok.kind == "SYMBOL" and tok.text in ("=", "!=", "<", "<=", ">", ">="):
            op = self.advance().text
            return BinOp(op, left, self._add_expr())
        return left

    def _add_expr(self):
        left = self._mul_expr()
        while True:
            if self.at_symbol("+") or self.at_symbol("-"):
                op = self.advance().text
                left = BinOp(op, left, self._mul_expr())
            else:
                return left

    def _mul_expr(self):
        left = self._unary_expr()
        while True:
            if self.at_symbol("*") or self.at_symbol("/"):
                op = self.advance().text
                left = BinOp(op, left, self._unary_expr())
            else:
                return left

    def _unary_expr(self):
        if self.accept_symbol("-"):
            operand = self._unary_expr()
            # fold negation into numeric literals for cleaner round trips
            if isinstance(operand, Literal) and isinstance(operand.value, (int,)) \
                    and not isinstance(operand.value, bool):
                return Literal(-operand.value)
            if isinstance(operand, Literal) and operand.value is not None \
                    and not isinstance(operand.value, str):
                return Literal(-operand.value)
            return Unary("-", operand)
        return self._primary()

    def _primary(self):
        tok = self.peek()
        if tok.kind == "NUMBER" or tok.kind == "STRING":
            self.advance()
            return Literal(tok.value)
        if tok.kind == "PARAM":
            self.advance()
            return Param(tok.value)
        if self.accept_keyword("NULL"):
            return Literal(None)
        if self.accept_keyword("ROWID"):
            return RowidRef()
        if self.accept_keyword("CASE"):
            return self._case_expr()
        if tok.kind == "IDENT":
            name = self.advance().value
            if self.accept_symbol("."):
                col = self.expect_ident("column name")
                return ColRef(name, col)
            return ColRef(None, name)
        if self.accept_symbol("("):
            expr = self.parse_expr()
            self.expect_symbol(")")
            return expr
        self.error(f"unexpected {tok.text or 'end of input'!r} in expression")

    def _case_expr(self):
        whens = []
        self.expect_keyword("WHEN")
        while True:
            cond = self.parse_expr()
            self.expect_keyword("THEN")
            whens.append((cond, self.parse_expr()))
            if not self.accept_keyword("WHEN"):
                break
        self.expect_keyword("ELSE")
        else_ = self.parse_expr()
        self.expect_keyword("END")
        return CaseExpr(tuple(whens), else_)

    # -- statements -----------------------------------------------------------

    def parse_statement(self):
        if self.at_keyword("SELECT"):
            return self.parse_compound_select()
        if self.at_keyword("INSERT"):
            return self._insert()
        if self.at_keyword("UPDATE"):
            return self._update()
        if self.at_keyword("DELETE"):
            return self._delete()
        if self.at_keyword("PROVENANCE"):
            return self._provenance()
        self.error(f"unexpected {self.peek().text or 'end of input'!r}",
                   expected=("SELECT", "INSERT", "UPDATE", "DELETE", "PROVENANCE"))

    def parse_compound_select(self) -> Select:
        first = self._select()
        branches = []
        while self.at_keyword("UNION"):
            self.advance()
            self.expect_keyword("ALL")
            branches.append(self._select())
        if branches:
            return Select(first.items, first.from_, first.where, tuple(branches))
        return first

    def _select(self) -> Select:
        self.expect_keyword("SELECT")
        if self.accept_symbol("*"):
            items = None
        else:
            items = [self._select_item()]
            while self.accept_symbol(","):
                items.append(self._select_item())
            items = tuple(items)
        from_items: tuple = ()
        if self.accept_keyword("FROM"):
            parts = [self._from_item()]
            while self.accept_symbol(","):
                parts.append(self._from_item())
            from_items = tuple(parts)
        where = None
        if self.accept_keyword("WHERE"):
            where = self.parse_expr()
        return Select(items, from_items, where)

    def _select_item(self) -> SelectItem:
        expr = self.parse_expr()
        alias = None
        if self.accept_keyword("AS"):
            alias = self.expect_ident("alias")
        elif self.peek().kind == "IDENT":
            alias = self.advance().value
        return SelectItem(expr, alias)

    def _from_item(self):
        if self.accept_symbol("("):
            select = self.parse_compound_select()
            self.expect_symbol(")")
            self.accept_keyword("AS")
            alias = self.expect_ident("derived table alias")
            return DerivedTable(select, alias)
        table = self.expect_ident("table name")
        asof = None
        alias = None
        if self.at_keyword("AS"):
            self.advance()
            if self.accept_keyword("OF"):
                asof = self._asof_literal()
                # an alias may still follow the time-travel clause
                if self.accept_keyword("AS"):
                    alias = self.expect_ident("alias")
                elif self.peek().kind == "IDENT":
                    alias = self.advance().value
            else:
                alias = self.expect_ident("alias")
        elif self.peek().kind == "IDENT":
            alias = self.advance().value
        return TableRef(table, alias, asof)

    def _asof_literal(self) -> Literal:
        tok = self.peek()
        if tok.kind in ("NUMBER", "STRING"):
            self.advance()
            return Literal(tok.value)
        self.error("AS OF expects an scn integer or a quoted timestamp")

    def _insert(self) -> Insert:
        self.expect_keyword("INSERT")
        self.expect_keyword("INTO")
        table = self.expect_ident("table name")
        if self.accept_keyword("VALUES"):
            rows = [self._value_row()]
            while self.accept_symbol(","):
                rows.append(self._value_row())
            return Insert(table, ValuesSource(tuple(rows)))
        if self.accept_symbol("("):
            select = self.parse_compound_select()
            self.expect_symbol(")")
            return Insert(table, select)
        if self.at_keyword("SELECT"):
            return Insert(table, self.parse_compound_select())
        self.error("INSERT expects VALUES or a query", expected=("VALUES", "SELECT"))

    def _value_row(self) -> tuple:
        self.expect_symbol("(")
        values = [self.parse_expr()]
        while self.accept_symbol(","):
            values.append(self.parse_expr())
        self.expect_symbol(")")
        return tuple(values)

    def _update(self) -> Update:
        self.expect_keyword("UPDATE")
        table = self.expect_ident("table name")
        self.expect_keyword("SET")
        sets = [self._assignment()]
        while self.accept_symbol(","):
            sets.append(self._assignment())
        where = None
        if self.accept_keyword("WHERE"):
            where = self.parse_expr()
        return Update(table, tuple(sets), where)

    def _assignment(self) -> tuple:
        col = self.expect_ident("column name")
        self.expect_symbol("=")
        return (col, self.parse_expr())

    def _delete(self) -> Delete:
        self.expect_keyword("DELETE")
        self.expect_keyword("FROM")
        table = self.expect_ident("table name")
        where = None
        if self.accept_keyword("WHERE"):
            where = self.parse_expr()
        return Delete(table, where)

    def _provenance(self) -> ProvenanceRequest:
        self.expect_keyword("PROVENANCE")
        self.expect_keyword("OF")
        if self.accept_keyword("TRANSACTION"):
            tok = self.peek()
            if tok.kind != "NUMBER" or not isinstance(tok.value, int):
                self.error("PROVENANCE OF TRANSACTION expects an integer id")
            self.advance()
            return ProvenanceRequest(tok.value, None)
        self.expect_symbol("(")
        query = self.parse_compound_select()
        self.expect_symbol(")")
        return ProvenanceRequest(None, query)

    def finish(self):
        self.accept_symbol(";")
        tok = self.peek()
        if tok.kind != "EOF":
            self.error(f"trailing input {tok.text!r}")


def parse(sql: str, line_offset: int = 0):
    """Parse one statement of the SQL subset into a surface AST."""
    parser = _Parser(tokenize(sql, line_offset))
    stmt = parser.parse_statement()
    parser.finish()
    return stmt


def parse_expression(sql: str):
    parser = _Parser(tokenize(sql))
    expr = parser.parse_expr()
    parser.finish()
    return expr
