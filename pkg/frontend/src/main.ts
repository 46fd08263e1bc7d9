import { PlayClient, ServiceError, type FetchLike } from "./client.js";
import type { Analysis, GraphSpec, NodeId, Snapshot, StartSpec } from "./types.js";
import { render, type ViewState } from "./view.js";

export interface PlayApi {
  createSession(graph: GraphSpec, start: StartSpec): Promise<{ id: string; snapshot: Snapshot }>;
  snapshot(id: string): Promise<Snapshot>;
  fire(id: string, node: NodeId): Promise<Snapshot>;
  undo(id: string): Promise<Snapshot>;
  analysis(id: string): Promise<Analysis>;
}

/** Snapshot-authoritative board controller: one request in flight, no local game logic. */
export class BoardController {
  readonly state: ViewState = {
    graph: null,
    snapshot: null,
    formHistory: [],
    fired: [],
    suggestion: null,
    showSuggestion: false,
    busy: false,
    error: null,
    hint: null,
  };

  private sessionId: string | null = null;
  private inflight: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: PlayApi,
    private readonly graph: GraphSpec,
    private readonly start: StartSpec,
  ) {
    this.state.graph = graph;
  }

  /** Resolves once every queued interaction has settled. */
  whenIdle(): Promise<void> {
    return this.inflight;
  }

  init(): Promise<void> {
    return this.enqueue(async () => {
      const created = await this.client.createSession(this.graph, this.start);
      this.sessionId = created.id;
      this.applySnapshot(created.snapshot);
      await this.refreshAnalysis();
    });
  }

  fire(node: NodeId): Promise<void> {
    return this.enqueue(async () => {
      const snap = this.state.snapshot;
      if (!this.sessionId || !snap || !snap.legal.map(String).includes(String(node))) {
        return;
      }
      this.applySnapshot(await this.client.fire(this.sessionId, node), node);
      await this.refreshAnalysis();
    });
  }

  undo(): Promise<void> {
    return this.enqueue(async () => {
      if (!this.sessionId) {
        return;
      }
      this.applySnapshot(await this.client.undo(this.sessionId));
      await this.refreshAnalysis();
    });
  }

  toggleSuggestion(): Promise<void> {
    return this.enqueue(async () => {
      this.state.showSuggestion = !this.state.showSuggestion;
    });
  }

  dismissError(): void {
    this.state.error = null;
    this.render();
  }

  /** Serialize interactions: while one is busy, further clicks are ignored. */
  private enqueue(action: () => Promise<void>): Promise<void> {
    if (this.state.busy) {
      return this.inflight;
    }
    this.state.busy = true;
    this.render();
    const run = action()
      .catch((err) => {
        this.state.error =
          err instanceof ServiceError ? `${err.code}: ${err.message}` : String(err);
      })
      .then(() => {
        this.state.busy = false;
        this.render();
      });
    this.inflight = this.inflight.then(() => run);
    return run;
  }

  private applySnapshot(snap: Snapshot, firedNode?: NodeId): void {
    this.state.snapshot = snap;
    const moves = snap.move_count;
    this.state.fired =
      firedNode === undefined
        ? this.state.fired.slice(0, moves)
        : [...this.state.fired.slice(0, moves - 1), firedNode];
    if (snap.linear_form !== null) {
      this.state.formHistory = [...this.state.formHistory.slice(0, moves), snap.linear_form];
    }
  }

  private async refreshAnalysis(): Promise<void> {
    if (!this.sessionId || !this.state.snapshot?.eligible) {
      this.state.suggestion = null;
      this.state.hint = null;
      return;
    }
    const analysis = await this.client.analysis(this.sessionId);
    this.state.suggestion = analysis.suggested_sequence;
    this.state.hint = analysis.hint;
  }

  render(): void {
    render(this.root, this.state, {
      onFire: (node) => void this.fire(node),
      onUndo: () => void this.undo(),
      onToggleSuggestion: () => void this.toggleSuggestion(),
      onDismissError: () => this.dismissError(),
    });
  }
}

export interface BootConfig {
  base: string;
  graph: GraphSpec;
  start: StartSpec;
  fetchFn?: FetchLike;
}

export function boot(root: HTMLElement, config: BootConfig): BoardController {
  const client = new PlayClient(config.base, config.fetchFn);
  const controller = new BoardController(root, client, config.graph, config.start);
  controller.render();
  void controller.init();
  return controller;
}

/** Unit-amplitude odd-neighborly triangle; the default interactive board. */
export const UNIT_TRIANGLE: GraphSpec = {
  nodes: ["g1", "g2", "g3"],
  edges: [
    { from: "g1", to: "g2", amp: 1, amp_back: 1, m: 3 },
    { from: "g1", to: "g3", amp: 1, amp_back: 1, m: 3 },
    { from: "g2", to: "g3", amp: 1, amp_back: 1, m: 3 },
  ],
};

declare global {
  interface Window {
    egameBoot?: typeof boot;
  }
}

if (typeof document !== "undefined") {
  const mount = document.getElementById("egame-root");
  if (mount) {
    const params = new URLSearchParams(window.location.search);
    boot(mount, {
      base: params.get("service") ?? "http://127.0.0.1:8000",
      graph: UNIT_TRIANGLE,
      start: params.get("start") ?? "omega1",
    });
  }
  if (typeof window !== "undefined") {
    window.egameBoot = boot;
  }
}
