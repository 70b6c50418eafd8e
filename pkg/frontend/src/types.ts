// Shapes of the server's JSON documents (see docs/api.md). Every number the
// UI displays originates from one of these fields.

export type Value = number | string | null | { dec: string };

export interface StatementSummary {
  stmtIndex: number;
  startScn: number;
  endScn: number;
  sql: string;
  binds: Record<string, Value>;
  kind: string;
}

export interface TxnSummary {
  xid: number;
  session: string;
  isolation: string;
  state: string;
  beginScn: number;
  commitScn: number | null;
  endScn: number | null;
  beginWallClock?: string;
  statements: StatementSummary[];
}

export interface LogEntry {
  kind: string;
  stmtIndex: number | null;
  sqlText: string | null;
  binds: Record<string, Value>;
  stmtScn: number;
  wallClock: string;
}

export interface TxnDetail extends TxnSummary {
  entries: LogEntry[];
}

export interface ColumnSchema {
  name: string;
  kind: string;
}

export interface DebugRow {
  rowId: number;
  values: Value[];
  creatorXid: number | null;
  creatorStmt: number | null;
  scn: number | null;
  affected: boolean;
  ref: string;
  prov: string[];
}

export interface DebugColumn {
  index: number;
  sql: string | null;
  binds: Record<string, Value>;
  reenactSql: string | null;
  tables: Record<string, DebugRow[]>;
}

export interface DebugView {
  xid: number;
  isolation: string;
  state: string;
  tables: string[];
  showUnaffected: boolean;
  schemas: Record<string, ColumnSchema[]>;
  columns: DebugColumn[];
}

export interface GraphNode {
  id: string;
  table: string;
  rowId: number;
  values: string[];
  creatorXid: number | null;
  creatorStmt: number | null;
  scn: number | null;
  layer: number;
}

export interface GraphEdge {
  from: string;
  to: string;
}

export interface ProvGraph {
  root: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export type EditOp = "KEEP" | "REPLACE" | "INSERT_AT" | "DELETE";

export interface StatementEdit {
  op: EditOp;
  index: number;
  sql?: string;
  binds?: Record<string, Value>;
}

export interface DataEdit {
  table: string;
  rows: Value[][];
}

export interface WhatIfScenario {
  dataEdits: DataEdit[];
  statementEdits: StatementEdit[] | null;
  showUnaffected?: boolean;
}

export interface WouldAbort {
  stmtIndex: number;
  conflictXid: number;
  table: string;
  rowId: number;
}

export interface ColumnChange {
  name: string;
  old: Value;
  new: Value;
}

export interface RowChange {
  rowId: number;
  columns: ColumnChange[];
  creatorChanged: boolean;
}

export interface TableDiff {
  table: string;
  onlyInOriginal: number[];
  onlyInScenario: number[];
  changed: RowChange[];
}

export interface WhatIfResult {
  wouldAbort: WouldAbort | null;
  statements: string[];
  view: DebugView;
  divergence: TableDiff[];
}

export interface ExecuteResult {
  transactions: TxnSummary[];
  issues: { line: number; code: string; message: string }[];
  skipped: { line: number; reason: string }[];
}
