// Horizontal timeline: one row per transaction, its id on the left bar,
// one interval bar per statement. Timing comes verbatim from the server's
// startScn/endScn fields; the window only scales and clips.
import type { TxnSummary } from "./types.js";

export interface TimelineWindow {
  from: number;
  to: number;
}

export interface TimelineOptions {
  window?: TimelineWindow;
  width?: number;
  onSelect?: (xid: number) => void;
}

const ROW_HEIGHT = 26;
const LABEL_WIDTH = 64;

export function dataWindow(txns: TxnSummary[]): TimelineWindow {
  let lo = Infinity;
  let hi = -Infinity;
  for (const txn of txns) {
    lo = Math.min(lo, txn.beginScn);
    hi = Math.max(hi, txn.endScn ?? txn.beginScn);
  }
  if (!txns.length) return { from: 0, to: 1 };
  return { from: lo, to: Math.max(hi, lo + 1) };
}

export function zoom(window: TimelineWindow, factor: number): TimelineWindow {
  const mid = (window.from + window.to) / 2;
  const half = Math.max(0.5, ((window.to - window.from) / 2) * factor);
  return { from: mid - half, to: mid + half };
}

export function scroll(window: TimelineWindow, delta: number): TimelineWindow {
  const step = (window.to - window.from) * delta;
  return { from: window.from + step, to: window.to + step };
}

export function renderTimeline(container: HTMLElement, txns: TxnSummary[],
                               options: TimelineOptions = {}): void {
  container.innerHTML = "";
  container.classList.add("timeline");
  if (!txns.length) {
    const empty = document.createElement("p");
    empty.className = "timeline-empty";
    empty.textContent = "No transactions in this range.";
    container.appendChild(empty);
    return;
  }
  const window_ = options.window ?? dataWindow(txns);
  const width = options.width ?? 720;
  const span = Math.max(window_.to - window_.from, 1e-9);
  const scale = (scn: number) =>
    LABEL_WIDTH + ((scn - window_.from) / span) * (width - LABEL_WIDTH);

  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(txns.length * ROW_HEIGHT + 20));
  svg.classList.add("timeline-chart");

  txns.forEach((txn, i) => {
    const y = i * ROW_HEIGHT + 6;
    const row = document.createElementNS(svg.namespaceURI, "g") as SVGGElement;
    row.classList.add("timeline-row");
    row.dataset.xid = String(txn.xid);
    row.addEventListener("click", () => options.onSelect?.(txn.xid));

    const label = document.createElementNS(svg.namespaceURI, "text");
    label.setAttribute("x", "4");
    label.setAttribute("y", String(y + 13));
    label.classList.add("txn-label");
    label.textContent = `T${txn.xid}`;
    row.appendChild(label);

    const end = txn.endScn ?? window_.to;
    const clippedBegin = Math.max(txn.beginScn, window_.from);
    const clippedEnd = Math.min(end, window_.to);
    if (clippedEnd > clippedBegin) {
      const extent = document.createElementNS(svg.namespaceURI, "rect");
      extent.classList.add("txn-extent");
      if (txn.state === "ABORTED") extent.classList.add("txn-aborted");
      extent.setAttribute("x", String(scale(clippedBegin)));
      extent.setAttribute("y", String(y + 7));
      extent.setAttribute("width",
        String(Math.max(2, scale(clippedEnd) - scale(clippedBegin))));
      extent.setAttribute("height", "4");
      row.appendChild(extent);
    }

    for (const stmt of txn.statements) {
      const from = Math.max(stmt.startScn, window_.from);
      const to = Math.min(stmt.endScn, window_.to);
      if (to <= from) continue;
      const bar = document.createElementNS(
        svg.namespaceURI, "rect") as SVGRectElement;
      bar.classList.add("stmt-interval");
      bar.dataset.stmt = String(stmt.stmtIndex);
      bar.setAttribute("x", String(scale(from)));
      bar.setAttribute("y", String(y));
      bar.setAttribute("width", String(Math.max(2, scale(to) - scale(from))));
      bar.setAttribute("height", "12");
      const title = document.createElementNS(svg.namespaceURI, "title");
      title.textContent =
        `[${stmt.stmtIndex}] scn ${stmt.startScn}..${stmt.endScn}  ${stmt.sql}`;
      bar.appendChild(title);
      row.appendChild(bar);
    }
    svg.appendChild(row);
  });
  container.appendChild(svg);
}
