// Thin fetch client for the cockpit. All numbers shown in the UI come from
// these documents; the client never recomputes model math.

import type { DatasetDoc, PlotGeometry, ProcedureDoc, RankRow } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseResponse<T>(resp: Response): Promise<T> {
  const text = await resp.text();
  let doc: unknown = null;
  try {
    doc = text ? JSON.parse(text) : null;
  } catch {
    doc = null;
  }
  if (!resp.ok) {
    const message =
      doc && typeof doc === "object" && "error" in (doc as Record<string, unknown>)
        ? String((doc as Record<string, unknown>).error)
        : `HTTP ${resp.status}`;
    throw new ApiError(resp.status, message);
  }
  return doc as T;
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    return parseResponse<T>(await fetch(this.base + path));
  }

  private async post<T>(path: string, body: Record<string, unknown>): Promise<T> {
    return parseResponse<T>(
      await fetch(this.base + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  health(): Promise<{ status: string }> {
    return this.get("/api/health");
  }

  dataset(hash: string): Promise<DatasetDoc> {
    return this.get(`/api/dataset/${encodeURIComponent(hash)}`);
  }

  rank(hash?: string): Promise<{ rows: RankRow[] }> {
    return this.get(`/api/rank${hash ? `?hash=${hash}` : ""}`);
  }

  procedure(dmu: string, hash?: string): Promise<ProcedureDoc> {
    const query = hash ? `?hash=${hash}` : "";
    return this.get(`/api/procedure/${encodeURIComponent(dmu)}${query}`);
  }

  phase(dmu: string, phase: 1 | 2 | 3, scenario: string, hash?: string): Promise<ProcedureDoc> {
    return this.post(`/api/procedure/${encodeURIComponent(dmu)}/phase${phase}`, {
      scenario,
      ...(hash ? { hash } : {}),
    });
  }

  tryScalar(dmu: string, kappa: number, override: boolean, hash?: string): Promise<ProcedureDoc> {
    return this.post(`/api/procedure/${encodeURIComponent(dmu)}/try`, {
      kappa,
      override,
      ...(hash ? { hash } : {}),
    });
  }

  commit(dmu: string, kappa: number, hash?: string): Promise<ProcedureDoc> {
    return this.post(`/api/procedure/${encodeURIComponent(dmu)}/commit`, {
      kappa,
      ...(hash ? { hash } : {}),
    });
  }

  plot(dmu: string, model: string, kappa?: number | null, hash?: string): Promise<PlotGeometry> {
    const params = new URLSearchParams({ model });
    if (kappa !== undefined && kappa !== null) params.set("kappa", String(kappa));
    if (hash) params.set("hash", hash);
    return this.get(`/api/plot/${encodeURIComponent(dmu)}?${params.toString()}`);
  }
}
