// Per-statement debug columns: SQL header, one grid per table, creator
// badges, provenance on tuple click, and in-place what-if editing (initial
// cells are editable, statement SQL is editable, statements can be added
// or deleted). Column order always equals the served order.
import { creatorLabel, formatValue } from "./format.js";
import type { DebugView, DebugRow } from "./types.js";
import { HighlightIndex, WhatIfDraft, describeChange } from "./whatif.js";

export interface DebugPanelHandlers {
  onTupleClick?: (table: string, rowId: number, columnIndex: number) => void;
  onToggleUnaffected?: (show: boolean) => void;
  onTableFilter?: (tables: string[]) => void;
  onSubmitWhatIf?: (draft: WhatIfDraft) => void;
  onReset?: () => void;
}

export interface DebugPanelState {
  draft?: WhatIfDraft;
  highlights?: HighlightIndex;
  banner?: string | null;
  scenarioLabel?: string;
}

export function renderDebugPanel(container: HTMLElement, view: DebugView,
                                 handlers: DebugPanelHandlers = {},
                                 state: DebugPanelState = {}): WhatIfDraft {
  const draft = state.draft ?? new WhatIfDraft(view);
  container.innerHTML = "";
  container.classList.add("debug-panel");

  const header = document.createElement("div");
  header.className = "debug-header";
  const title = document.createElement("h2");
  title.textContent =
    `Debugging T${view.xid} (${view.isolation}, ${view.state})`
    + (state.scenarioLabel ? ` — ${state.scenarioLabel}` : "");
  header.appendChild(title);

  if (state.banner) {
    const banner = document.createElement("div");
    banner.className = "wouldabort-banner";
    banner.textContent = state.banner;
    header.appendChild(banner);
  }

  const toolbar = document.createElement("div");
  toolbar.className = "debug-toolbar";

  const toggle = document.createElement("button");
  toggle.className = "toggle-unaffected";
  toggle.textContent = view.showUnaffected
    ? "Hide Unaffected Rows" : "Show Unaffected Rows";
  toggle.addEventListener("click", () =>
    handlers.onToggleUnaffected?.(!view.showUnaffected));
  toolbar.appendChild(toggle);

  const picker = document.createElement("span");
  picker.className = "table-picker";
  for (const table of view.tables) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = true;
    box.dataset.table = table;
    box.addEventListener("change", () => {
      const chosen = [...picker.querySelectorAll<HTMLInputElement>("input")]
        .filter((b) => b.checked).map((b) => b.dataset.table!);
      handlers.onTableFilter?.(chosen);
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(table));
    picker.appendChild(label);
  }
  toolbar.appendChild(picker);

  const run = document.createElement("button");
  run.className = "run-whatif";
  run.textContent = "Run What-If";
  run.addEventListener("click", () => handlers.onSubmitWhatIf?.(draft));
  toolbar.appendChild(run);

  const reset = document.createElement("button");
  reset.className = "reset-whatif";
  reset.textContent = "Reset";
  reset.addEventListener("click", () => handlers.onReset?.());
  toolbar.appendChild(reset);

  header.appendChild(toolbar);
  container.appendChild(header);

  const columns = document.createElement("div");
  columns.className = "debug-columns";
  const lastIndex = view.columns[view.columns.length - 1]?.index ?? -1;
  for (const column of view.columns) {
    columns.appendChild(renderColumn(view, column.index, handlers, draft,
      column.index === lastIndex ? state.highlights : undefined));
  }
  container.appendChild(columns);
  return draft;
}

function renderColumn(view: DebugView, index: number,
                      handlers: DebugPanelHandlers, draft: WhatIfDraft,
                      highlights: HighlightIndex | undefined): HTMLElement {
  const column = view.columns.find((c) => c.index === index)!;
  const el = document.createElement("div");
  el.className = "debug-column";
  el.dataset.index = String(index);

  const head = document.createElement("div");
  head.className = "column-head";
  if (index === -1) {
    const caption = document.createElement("h3");
    caption.textContent = "initial state";
    head.appendChild(caption);
    const hint = document.createElement("p");
    hint.className = "edit-hint";
    hint.textContent = "cells are editable for what-if";
    head.appendChild(hint);
    const add = document.createElement("button");
    add.className = "add-statement";
    add.dataset.before = "0";
    add.textContent = "+ statement";
    add.addEventListener("click", () => promptInsert(draft, 0, add));
    head.appendChild(add);
  } else {
    const caption = document.createElement("h3");
    caption.textContent = `statement ${index}`;
    head.appendChild(caption);
    const sql = document.createElement("textarea");
    sql.className = "stmt-sql";
    sql.value = column.sql ?? "";
    sql.addEventListener("change", () => {
      draft.replaceStatement(index, sql.value);
      el.classList.add("stmt-edited");
    });
    head.appendChild(sql);
    if (column.reenactSql) {
      const replay = document.createElement("pre");
      replay.className = "reenact-sql";
      replay.textContent = column.reenactSql;
      head.appendChild(replay);
    }
    const del = document.createElement("button");
    del.className = "delete-statement";
    del.textContent = "delete";
    del.addEventListener("click", () => {
      draft.deleteStatement(index);
      el.classList.add("stmt-deleted");
    });
    head.appendChild(del);
    const add = document.createElement("button");
    add.className = "add-statement";
    add.dataset.before = String(index + 1);
    add.textContent = "+ statement";
    add.addEventListener("click", () => promptInsert(draft, index + 1, add));
    head.appendChild(add);
  }
  el.appendChild(head);

  for (const table of view.tables) {
    el.appendChild(renderGrid(view, table, index, column.tables[table] ?? [],
      handlers, draft, highlights));
  }
  return el;
}

function promptInsert(draft: WhatIfDraft, before: number,
                      button: HTMLButtonElement): void {
  const editor = document.createElement("textarea");
  editor.className = "new-stmt-sql";
  editor.addEventListener("change", () => {
    if (editor.value.trim()) {
      draft.insertStatement(before, editor.value.trim());
      editor.classList.add("stmt-added");
    }
  });
  button.insertAdjacentElement("afterend", editor);
}

function renderGrid(view: DebugView, table: string, columnIndex: number,
                    rows: DebugRow[], handlers: DebugPanelHandlers,
                    draft: WhatIfDraft,
                    highlights: HighlightIndex | undefined): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "table-grid";
  wrap.dataset.table = table;
  const caption = document.createElement("h4");
  caption.textContent = table;
  wrap.appendChild(caption);

  const grid = document.createElement("table");
  grid.className = "debug-grid";
  grid.dataset.table = table;
  const thead = document.createElement("tr");
  for (const column of view.schemas[table]) {
    const th = document.createElement("th");
    th.textContent = column.name;
    thead.appendChild(th);
  }
  const creatorHead = document.createElement("th");
  creatorHead.textContent = "created by";
  thead.appendChild(creatorHead);
  grid.appendChild(thead);

  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.dataset.rowId = String(row.rowId);
    tr.className = "tuple-row";
    if (row.affected) tr.classList.add("affected");
    if (highlights?.changedRows.has(`${table}:${row.rowId}`)) {
      tr.classList.add("diff-changed-row");
    }
    if (highlights?.addedRows.has(`${table}:${row.rowId}`)) {
      tr.classList.add("diff-added");
    }
    row.values.forEach((value, i) => {
      const name = view.schemas[table][i].name;
      const td = document.createElement("td");
      td.className = "cell";
      td.dataset.column = name;
      td.textContent = formatValue(value);
      const change = highlights?.changedCells.get(`${table}:${row.rowId}:${name}`);
      if (change) {
        td.classList.add("diff-changed");
        td.title = describeChange(change);
      }
      if (columnIndex === -1) {
        td.contentEditable = "true";
        td.addEventListener("blur", () => {
          if (td.textContent !== formatValue(value)) {
            try {
              draft.editCell(table, row.rowId, name, td.textContent ?? "");
              td.classList.add("cell-edited");
            } catch {
              td.classList.add("cell-invalid");
            }
          }
        });
      } else {
        td.addEventListener("click", () =>
          handlers.onTupleClick?.(table, row.rowId, columnIndex));
      }
      tr.appendChild(td);
    });
    const creator = document.createElement("td");
    creator.className = "creator-badge";
    creator.textContent = creatorLabel(row.creatorXid, row.creatorStmt);
    tr.appendChild(creator);
    grid.appendChild(tr);
  }
  wrap.appendChild(grid);
  return wrap;
}
