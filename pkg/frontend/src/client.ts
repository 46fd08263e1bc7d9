import type { Analysis, GraphSpec, NodeId, Snapshot, StartSpec } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly code: string,
    readonly status: number,
    readonly detail: unknown = null,
  ) {
    super(message);
  }
}

/** Thin typed wrapper over the play-service endpoints. */
export class PlayClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      const err = body as { code?: string; message?: string; detail?: unknown };
      throw new ServiceError(
        err.message ?? `service error ${response.status}`,
        err.code ?? "error",
        response.status,
        err.detail ?? null,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: payload === undefined ? "{}" : JSON.stringify(payload),
    });
  }

  createSession(graph: GraphSpec, start: StartSpec): Promise<{ id: string; snapshot: Snapshot }> {
    return this.post("/sessions", { graph, start });
  }

  snapshot(id: string): Promise<Snapshot> {
    return this.request(`/sessions/${id}`);
  }

  fire(id: string, node: NodeId): Promise<Snapshot> {
    return this.post(`/sessions/${id}/fire`, { node });
  }

  undo(id: string): Promise<Snapshot> {
    return this.post(`/sessions/${id}/undo`);
  }

  analysis(id: string): Promise<Analysis> {
    return this.request(`/sessions/${id}/analysis`);
  }
}
