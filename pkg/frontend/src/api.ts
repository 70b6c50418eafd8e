import type {
  DebugView, ExecuteResult, ProvGraph, TxnDetail, TxnSummary,
  WhatIfResult, WhatIfScenario,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let code = "http_error";
    let message = `${response.status}`;
    try {
      const body = await response.json();
      code = body?.error?.code ?? code;
      message = body?.error?.message ?? message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, code, message);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private base: string = "") {}

  history(from?: number, to?: number): Promise<TxnSummary[]> {
    const params = new URLSearchParams();
    if (from !== undefined) params.set("from", String(from));
    if (to !== undefined) params.set("to", String(to));
    const query = params.toString();
    return request(`${this.base}/api/history${query ? "?" + query : ""}`);
  }

  transaction(xid: number): Promise<TxnDetail> {
    return request(`${this.base}/api/transactions/${xid}`);
  }

  debug(xid: number, all = false, tables?: string[]): Promise<DebugView> {
    const params = new URLSearchParams();
    if (all) params.set("all", "true");
    if (tables && tables.length) params.set("tables", tables.join(","));
    const query = params.toString();
    return request(
      `${this.base}/api/transactions/${xid}/debug${query ? "?" + query : ""}`);
  }

  provenance(xid: number, table: string, row: number,
             stmt?: number): Promise<ProvGraph> {
    const params = new URLSearchParams({ table, row: String(row) });
    if (stmt !== undefined) params.set("stmt", String(stmt));
    return request(
      `${this.base}/api/transactions/${xid}/provenance?${params.toString()}`);
  }

  whatif(xid: number, scenario: WhatIfScenario,
         signal?: AbortSignal): Promise<WhatIfResult> {
    return request(`${this.base}/api/transactions/${xid}/whatif`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(scenario),
      signal,
    });
  }

  execute(script: string): Promise<ExecuteResult> {
    return request(`${this.base}/api/execute`, {
      method: "POST",
      headers: { "Content-Type": "text/plain" },
      body: script,
    });
  }
}
