// Mocked server documents mirroring the banking write-skew history.
import type {
  DebugView, ProvGraph, TxnSummary, WhatIfResult,
} from "../src/types.js";

export const historyDoc: TxnSummary[] = [
  {
    xid: 1, session: "s1", isolation: "SNAPSHOT", state: "COMMITTED",
    beginScn: 3, commitScn: 8, endScn: 8,
    beginWallClock: "2016-03-01T00:00:03Z",
    statements: [
      { stmtIndex: 0, startScn: 5, endScn: 7, kind: "update", binds: {},
        sql: "UPDATE account SET bal = bal - 70 WHERE cust = 'Alice' AND typ = 'Checking'" },
      { stmtIndex: 1, startScn: 7, endScn: 8, kind: "insert", binds: {},
        sql: "INSERT INTO overdraft (SELECT ...)" },
    ],
  },
  {
    xid: 2, session: "s2", isolation: "SNAPSHOT", state: "COMMITTED",
    beginScn: 4, commitScn: 10, endScn: 10,
    beginWallClock: "2016-03-01T00:00:04Z",
    statements: [
      { stmtIndex: 0, startScn: 6, endScn: 9, kind: "update", binds: {},
        sql: "UPDATE account SET bal = bal - 40 WHERE cust = 'Alice' AND typ = 'Savings'" },
      { stmtIndex: 1, startScn: 9, endScn: 10, kind: "insert", binds: {},
        sql: "INSERT INTO overdraft (SELECT ...)" },
    ],
  },
];

const accountSchema = [
  { name: "cust", kind: "TEXT" },
  { name: "typ", kind: "TEXT" },
  { name: "bal", kind: "DEC" },
];

const overdraftSchema = [
  { name: "cust", kind: "TEXT" },
  { name: "bal", kind: "DEC" },
];

export const debugViewDoc: DebugView = {
  xid: 2, isolation: "SNAPSHOT", state: "COMMITTED",
  tables: ["account", "overdraft"], showUnaffected: true,
  schemas: { account: accountSchema, overdraft: overdraftSchema },
  columns: [
    {
      index: -1, sql: null, binds: {}, reenactSql: null,
      tables: {
        account: [
          { rowId: 1, values: ["Alice", "Checking", { dec: "50.00" }],
            creatorXid: 0, creatorStmt: null, scn: 1, affected: false,
            ref: "v:account:1:1", prov: [] },
          { rowId: 2, values: ["Alice", "Savings", { dec: "30.00" }],
            creatorXid: 0, creatorStmt: null, scn: 1, affected: false,
            ref: "v:account:2:1", prov: [] },
        ],
        overdraft: [],
      },
    },
    {
      index: 0, binds: {},
      sql: "UPDATE account SET bal = bal - 40 WHERE cust = 'Alice' AND typ = 'Savings'",
      reenactSql: "SELECT cust, typ, CASE WHEN ... END AS bal FROM account AS OF 4",
      tables: {
        account: [
          { rowId: 1, values: ["Alice", "Checking", { dec: "50.00" }],
            creatorXid: 0, creatorStmt: null, scn: 1, affected: false,
            ref: "v:account:1:1", prov: ["v:account:1:1"] },
          { rowId: 2, values: ["Alice", "Savings", { dec: "-10.00" }],
            creatorXid: 2, creatorStmt: 0, scn: null, affected: true,
            ref: "t:2:0:account:2", prov: ["v:account:2:1"] },
        ],
        overdraft: [],
      },
    },
    {
      index: 1, binds: {},
      sql: "INSERT INTO overdraft (SELECT a1.cust, a1.bal + a2.bal FROM account a1, account a2 WHERE ...)",
      reenactSql: "SELECT cust, bal FROM overdraft AS OF 4 UNION ALL SELECT ...",
      tables: {
        account: [
          { rowId: 1, values: ["Alice", "Checking", { dec: "50.00" }],
            creatorXid: 0, creatorStmt: null, scn: 1, affected: false,
            ref: "v:account:1:1", prov: ["v:account:1:1"] },
          { rowId: 2, values: ["Alice", "Savings", { dec: "-10.00" }],
            creatorXid: 2, creatorStmt: 0, scn: null, affected: false,
            ref: "t:2:0:account:2", prov: ["t:2:0:account:2"] },
        ],
        overdraft: [],
      },
    },
  ],
};

export const chainGraphDoc: ProvGraph = {
  root: "t:2:0:account:2",
  nodes: [
    { id: "t:2:0:account:2", table: "account", rowId: 2,
      values: ["Alice", "Savings", "-10.00"],
      creatorXid: 2, creatorStmt: 0, scn: null, layer: 0 },
    { id: "v:account:2:1", table: "account", rowId: 2,
      values: ["Alice", "Savings", "30.00"],
      creatorXid: 0, creatorStmt: null, scn: 1, layer: -1 },
  ],
  edges: [{ from: "t:2:0:account:2", to: "v:account:2:1" }],
};

export const layeredGraphDoc: ProvGraph = {
  root: "t:2:1:overdraft:1",
  nodes: [
    { id: "t:2:1:overdraft:1", table: "overdraft", rowId: 1,
      values: ["Alice", "-30.00"], creatorXid: 2, creatorStmt: 1,
      scn: null, layer: 1 },
    { id: "t:2:0:account:2", table: "account", rowId: 2,
      values: ["Alice", "Savings", "-10.00"], creatorXid: 2, creatorStmt: 0,
      scn: null, layer: 0 },
    { id: "v:account:1:8", table: "account", rowId: 1,
      values: ["Alice", "Checking", "-20.00"], creatorXid: 1, creatorStmt: 0,
      scn: 8, layer: -1 },
    { id: "v:account:2:1", table: "account", rowId: 2,
      values: ["Alice", "Savings", "30.00"], creatorXid: 0, creatorStmt: null,
      scn: 1, layer: -1 },
    { id: "v:account:1:1", table: "account", rowId: 1,
      values: ["Alice", "Checking", "50.00"], creatorXid: 0, creatorStmt: null,
      scn: 1, layer: -2 },
  ],
  edges: [
    { from: "t:2:1:overdraft:1", to: "t:2:0:account:2" },
    { from: "t:2:1:overdraft:1", to: "v:account:1:8" },
    { from: "t:2:0:account:2", to: "v:account:2:1" },
    { from: "v:account:1:8", to: "v:account:1:1" },
  ],
};

export const whatifResultDoc: WhatIfResult = {
  wouldAbort: { stmtIndex: 0, conflictXid: 1, table: "account", rowId: 1 },
  statements: [
    "UPDATE account SET bal = bal WHERE cust = 'Alice'",
    "UPDATE account SET bal = bal - 40 WHERE cust = 'Alice' AND typ = 'Savings'",
    "INSERT INTO overdraft (SELECT ...)",
  ],
  view: {
    ...debugViewDoc,
    columns: [
      debugViewDoc.columns[0],
      { ...debugViewDoc.columns[1], index: 0,
        sql: "UPDATE account SET bal = bal WHERE cust = 'Alice'" },
      { ...debugViewDoc.columns[1], index: 1 },
      { ...debugViewDoc.columns[2], index: 2 },
    ],
  },
  divergence: [
    {
      table: "account",
      onlyInOriginal: [],
      onlyInScenario: [],
      changed: [{
        rowId: 2,
        columns: [{ name: "bal", old: { dec: "-10.00" }, new: { dec: "-11.00" } }],
        creatorChanged: true,
      }],
    },
  ],
};
