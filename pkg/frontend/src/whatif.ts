// Draft state for what-if editing: cell edits in the initial-state column
// plus replace/delete/insert operations on the statement list. Serializes
// into the scenario document the server accepts.
import { formatValue, parseEdited, sameValue } from "./format.js";
import type {
  DebugView, StatementEdit, TableDiff, Value, WhatIfScenario,
} from "./types.js";

interface InsertedStatement {
  beforeIndex: number; // original index this statement precedes (n = append)
  sql: string;
  seq: number;
}

export class WhatIfDraft {
  private cellEdits = new Map<string, Value>(); // "table:rowId:col" -> value
  private replaced = new Map<number, string>();
  private deleted = new Set<number>();
  private inserted: InsertedStatement[] = [];
  private seq = 0;

  constructor(private view: DebugView) {}

  get statementCount(): number {
    return this.view.columns.length - 1;
  }

  editCell(table: string, rowId: number, column: string, text: string): void {
    const schema = this.view.schemas[table];
    const kind = schema.find((c) => c.name === column)?.kind ?? "TEXT";
    this.cellEdits.set(`${table}:${rowId}:${column}`, parseEdited(text, kind));
  }

  cellEdit(table: string, rowId: number, column: string): Value | undefined {
    return this.cellEdits.get(`${table}:${rowId}:${column}`);
  }

  replaceStatement(index: number, sql: string): void {
    this.deleted.delete(index);
    this.replaced.set(index, sql);
  }

  deleteStatement(index: number): void {
    this.replaced.delete(index);
    this.deleted.add(index);
  }

  insertStatement(beforeIndex: number, sql: string): void {
    this.inserted.push({ beforeIndex, sql, seq: this.seq++ });
  }

  hasEdits(): boolean {
    return this.cellEdits.size > 0 || this.replaced.size > 0
      || this.deleted.size > 0 || this.inserted.length > 0;
  }

  reset(): void {
    this.cellEdits.clear();
    this.replaced.clear();
    this.deleted.clear();
    this.inserted = [];
  }

  private dataEdits(): WhatIfScenario["dataEdits"] {
    const touched = new Set<string>();
    for (const key of this.cellEdits.keys()) touched.add(key.split(":")[0]);
    const edits: WhatIfScenario["dataEdits"] = [];
    const initial = this.view.columns[0];
    for (const table of this.view.tables) {
      if (!touched.has(table)) continue;
      const schema = this.view.schemas[table];
      const rows: Value[][] = [];
      for (const row of initial.tables[table]) {
        rows.push(schema.map((column, i) => {
          const edit = this.cellEdits.get(`${table}:${row.rowId}:${column.name}`);
          return edit === undefined ? row.values[i] : edit;
        }));
      }
      edits.push({ table, rows });
    }
    return edits;
  }

  private statementEdits(): StatementEdit[] | null {
    if (!this.replaced.size && !this.deleted.size && !this.inserted.length) {
      return null;
    }
    const edits: StatementEdit[] = [];
    const emitInsertsBefore = (index: number) => {
      for (const ins of this.inserted) {
        if (ins.beforeIndex === index) {
          edits.push({ op: "INSERT_AT", index, sql: ins.sql, binds: {} });
        }
      }
    };
    for (let i = 0; i < this.statementCount; i++) {
      emitInsertsBefore(i);
      if (this.deleted.has(i)) {
        edits.push({ op: "DELETE", index: i });
      } else if (this.replaced.has(i)) {
        edits.push({ op: "REPLACE", index: i, sql: this.replaced.get(i)!, binds: {} });
      } else {
        edits.push({ op: "KEEP", index: i });
      }
    }
    emitInsertsBefore(this.statementCount);
    return edits;
  }

  toScenario(showUnaffected: boolean): WhatIfScenario {
    return {
      dataEdits: this.dataEdits(),
      statementEdits: this.statementEdits(),
      showUnaffected,
    };
  }
}

// -- divergence highlighting ------------------------------------------------

export interface HighlightIndex {
  changedCells: Map<string, { old: Value; new: Value }>; // "table:rowId:col"
  changedRows: Set<string>; // "table:rowId"
  addedRows: Set<string>;
  removedRows: Map<string, number[]>; // table -> row ids only in original
}

export function indexDivergence(divergence: TableDiff[]): HighlightIndex {
  const changedCells = new Map<string, { old: Value; new: Value }>();
  const changedRows = new Set<string>();
  const addedRows = new Set<string>();
  const removedRows = new Map<string, number[]>();
  for (const diff of divergence) {
    for (const rowId of diff.onlyInScenario) {
      addedRows.add(`${diff.table}:${rowId}`);
    }
    if (diff.onlyInOriginal.length) {
      removedRows.set(diff.table, diff.onlyInOriginal);
    }
    for (const change of diff.changed) {
      changedRows.add(`${diff.table}:${change.rowId}`);
      for (const column of change.columns) {
        changedCells.set(`${diff.table}:${change.rowId}:${column.name}`,
          { old: column.old, new: column.new });
      }
    }
  }
  return { changedCells, changedRows, addedRows, removedRows };
}

export function describeChange(change: { old: Value; new: Value }): string {
  return `${formatValue(change.old)} -> ${formatValue(change.new)}`;
}

export { sameValue };
