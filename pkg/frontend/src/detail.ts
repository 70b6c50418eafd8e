// Transaction detail panel: isolation, timing, session, statement SQL with
// binds, and the entry point into the debug view.
import { formatValue } from "./format.js";
import type { TxnDetail } from "./types.js";

export function renderDetail(container: HTMLElement, detail: TxnDetail,
                             onDebug?: (xid: number) => void): void {
  container.innerHTML = "";
  container.classList.add("detail-panel");

  const title = document.createElement("h2");
  title.textContent = `Transaction T${detail.xid}`;
  container.appendChild(title);

  const facts = document.createElement("dl");
  facts.className = "txn-facts";
  const fact = (name: string, value: string) => {
    const dt = document.createElement("dt");
    dt.textContent = name;
    const dd = document.createElement("dd");
    dd.textContent = value;
    facts.appendChild(dt);
    facts.appendChild(dd);
  };
  fact("state", detail.state);
  fact("isolation", detail.isolation);
  fact("session / user", detail.session);
  fact("begin", `scn ${detail.beginScn}`
    + (detail.beginWallClock ? ` (${detail.beginWallClock})` : ""));
  if (detail.commitScn !== null) {
    const commit = detail.entries.find((e) => e.kind === "COMMIT");
    fact("commit", `scn ${detail.commitScn}`
      + (commit ? ` (${commit.wallClock})` : ""));
  }
  container.appendChild(facts);

  const list = document.createElement("ol");
  list.className = "stmt-list";
  list.start = 0;
  for (const stmt of detail.statements) {
    const item = document.createElement("li");
    const sql = document.createElement("code");
    sql.textContent = stmt.sql;
    item.appendChild(sql);
    const timing = document.createElement("span");
    timing.className = "stmt-timing";
    timing.textContent = ` scn ${stmt.startScn}`;
    item.appendChild(timing);
    const bindNames = Object.keys(stmt.binds);
    if (bindNames.length) {
      const binds = document.createElement("div");
      binds.className = "stmt-binds";
      binds.textContent = bindNames.sort()
        .map((name) => `${name} = ${formatValue(stmt.binds[name])}`)
        .join(", ");
      item.appendChild(binds);
    }
    list.appendChild(item);
  }
  container.appendChild(list);

  const button = document.createElement("button");
  button.id = "debug-txn";
  button.textContent = "Debug Transaction";
  button.addEventListener("click", () => onDebug?.(detail.xid));
  container.appendChild(button);
}
