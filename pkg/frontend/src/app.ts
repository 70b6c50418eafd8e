// Wires the panels to the live API: timeline -> detail -> debug panel with
// provenance overlays and what-if round trips. At most one what-if request
// is in flight; newer submissions cancel older ones.
import { ApiClient, ApiError } from "./api.js";
import { renderDebugPanel } from "./debugPanel.js";
import { renderDetail } from "./detail.js";
import { renderProvGraph } from "./provGraph.js";
import { TimelineWindow, dataWindow, renderTimeline, scroll, zoom } from "./timeline.js";
import type { DebugView, TxnSummary, WhatIfResult } from "./types.js";
import { WhatIfDraft, indexDivergence } from "./whatif.js";

const api = new ApiClient();

interface AppState {
  txns: TxnSummary[];
  window: TimelineWindow | null;
  selected: number | null;
  view: DebugView | null;
  showUnaffected: boolean;
  tableFilter: string[] | null;
  whatif: WhatIfResult | null;
  inflight: AbortController | null;
}

const state: AppState = {
  txns: [], window: null, selected: null, view: null,
  showUnaffected: false, tableFilter: null, whatif: null, inflight: null,
};

function el(id: string): HTMLElement {
  return document.getElementById(id)!;
}

function showError(message: string): void {
  const banner = el("error-banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
  const retry = document.createElement("button");
  retry.textContent = "retry";
  retry.addEventListener("click", () => {
    banner.classList.add("hidden");
    void loadHistory();
  });
  banner.appendChild(retry);
}

async function loadHistory(): Promise<void> {
  try {
    state.txns = await api.history();
    if (!state.window) state.window = dataWindow(state.txns);
    drawTimeline();
  } catch (error) {
    showError(`cannot load history: ${(error as Error).message} `);
  }
}

function drawTimeline(): void {
  renderTimeline(el("timeline"), state.txns, {
    window: state.window ?? undefined,
    onSelect: (xid) => void selectTxn(xid),
  });
}

async function selectTxn(xid: number): Promise<void> {
  state.selected = xid;
  const detail = await api.transaction(xid);
  renderDetail(el("detail"), detail, (target) => void openDebug(target));
}

async function openDebug(xid: number): Promise<void> {
  state.selected = xid;
  state.whatif = null;
  state.view = await api.debug(xid, state.showUnaffected,
    state.tableFilter ?? undefined);
  drawDebug();
}

function drawDebug(): void {
  if (!state.view) return;
  const result = state.whatif;
  renderDebugPanel(el("debug"), result ? result.view : state.view, {
    onTupleClick: (table, rowId, stmt) => void showProvenance(table, rowId, stmt),
    onToggleUnaffected: (show) => {
      state.showUnaffected = show;
      void openDebug(state.selected!);
    },
    onTableFilter: (tables) => {
      state.tableFilter = tables;
      void openDebug(state.selected!);
    },
    onSubmitWhatIf: (draft) => void submitWhatIf(draft),
    onReset: () => {
      state.whatif = null;
      void openDebug(state.selected!);
    },
  }, {
    highlights: result ? indexDivergence(result.divergence) : undefined,
    banner: result?.wouldAbort
      ? `Would abort at statement ${result.wouldAbort.stmtIndex}: `
        + `write-write conflict with T${result.wouldAbort.conflictXid} on `
        + `${result.wouldAbort.table} row ${result.wouldAbort.rowId}`
      : null,
    scenarioLabel: result ? "what-if scenario" : undefined,
  });
}

async function showProvenance(table: string, rowId: number,
                              stmt: number): Promise<void> {
  try {
    const graph = await api.provenance(state.selected!, table, rowId, stmt);
    const overlay = el("prov-overlay");
    overlay.classList.remove("hidden");
    renderProvGraph(el("prov-graph"), graph);
  } catch (error) {
    const chip = el("prov-error");
    chip.textContent = (error as ApiError).message;
    chip.classList.remove("hidden");
  }
}

async function submitWhatIf(draft: WhatIfDraft): Promise<void> {
  if (!draft.hasEdits()) return;
  state.inflight?.abort();
  const controller = new AbortController();
  state.inflight = controller;
  try {
    state.whatif = await api.whatif(state.selected!,
      draft.toScenario(state.showUnaffected), controller.signal);
    drawDebug();
  } catch (error) {
    if ((error as Error).name !== "AbortError") {
      showError(`what-if failed: ${(error as Error).message} `);
    }
  } finally {
    if (state.inflight === controller) state.inflight = null;
  }
}

export function bootstrap(): void {
  el("zoom-in").addEventListener("click", () => {
    if (state.window) state.window = zoom(state.window, 0.5);
    drawTimeline();
  });
  el("zoom-out").addEventListener("click", () => {
    if (state.window) state.window = zoom(state.window, 2);
    drawTimeline();
  });
  el("scroll-left").addEventListener("click", () => {
    if (state.window) state.window = scroll(state.window, -0.25);
    drawTimeline();
  });
  el("scroll-right").addEventListener("click", () => {
    if (state.window) state.window = scroll(state.window, 0.25);
    drawTimeline();
  });
  el("prov-close").addEventListener("click", () =>
    el("prov-overlay").classList.add("hidden"));
  void loadHistory();
}

if (typeof document !== "undefined" && document.getElementById("timeline")) {
  bootstrap();
}
