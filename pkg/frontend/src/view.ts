import type { GraphSpec, NodeId, Snapshot } from "./types.js";

export interface ViewState {
  graph: GraphSpec | null;
  snapshot: Snapshot | null;
  formHistory: number[];
  fired: NodeId[];
  suggestion: NodeId[] | null;
  showSuggestion: boolean;
  busy: boolean;
  error: string | null;
  hint: string | null;
}

export interface Handlers {
  onFire(node: NodeId): void;
  onUndo(): void;
  onToggleSuggestion(): void;
  onDismissError(): void;
}

/** Fixed triangle layout: first node top-right, second bottom-right, third left. */
const LAYOUT: ReadonlyArray<readonly [number, number]> = [
  [320, 74],
  [320, 286],
  [84, 180],
];

const SVG_NS = "http://www.w3.org/2000/svg";

/** Six significant digits, trailing zeros trimmed. */
export function formatValue(value: number): string {
  return String(Number(value.toPrecision(6)));
}

function svgEl(tag: string, attrs: Record<string, string>, text?: string): SVGElement {
  const el = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, val] of Object.entries(attrs)) {
    el.setAttribute(key, val);
  }
  if (text !== undefined) {
    el.textContent = text;
  }
  return el;
}

function htmlEl(tag: string, attrs: Record<string, string>, text?: string): HTMLElement {
  const el = document.createElement(tag);
  for (const [key, val] of Object.entries(attrs)) {
    el.setAttribute(key, val);
  }
  if (text !== undefined) {
    el.textContent = text;
  }
  return el;
}

function point(i: number): readonly [number, number] {
  return LAYOUT[i % LAYOUT.length]!;
}

/** Directed amplitude label plus arrowhead, placed near the source node. */
function edgeDecorations(from: number, to: number, amp: number): SVGElement[] {
  const [x1, y1] = point(from);
  const [x2, y2] = point(to);
  const dx = x2 - x1;
  const dy = y2 - y1;
  const len = Math.hypot(dx, dy);
  const ux = dx / len;
  const uy = dy / len;
  // Perpendicular offset keeps the two directions of an edge apart.
  const px = -uy * 12;
  const py = ux * 12;
  const ax = x1 + ux * (len * 0.34);
  const ay = y1 + uy * (len * 0.34);
  const arrow = svgEl("path", {
    d: `M ${ax + px} ${ay + py} l ${ux * 14} ${uy * 14}`,
    class: "edge-arrow",
    "marker-end": "url(#egame-arrowhead)",
  });
  const label = svgEl(
    "text",
    { x: String(ax + px * 1.9), y: String(ay + py * 1.9), class: "edge-amp" },
    formatValue(amp),
  );
  return [arrow, label];
}

function renderBoardSvg(state: ViewState, handlers: Handlers): SVGElement {
  const snap = state.snapshot!;
  const svg = svgEl("svg", {
    viewBox: "0 0 420 360",
    width: "420",
    height: "360",
    "data-role": "board",
  });
  const defs = svgEl("defs", {});
  const marker = svgEl("marker", {
    id: "egame-arrowhead",
    markerWidth: "8",
    markerHeight: "8",
    refX: "6",
    refY: "3",
    orient: "auto",
  });
  marker.appendChild(svgEl("path", { d: "M 0 0 L 6 3 L 0 6 z", class: "edge-arrow" }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  const index = new Map(snap.nodes.map((n, i) => [String(n), i]));
  for (const edge of state.graph?.edges ?? []) {
    const i = index.get(String(edge.from));
    const j = index.get(String(edge.to));
    if (i === undefined || j === undefined) {
      continue;
    }
    const [x1, y1] = point(i);
    const [x2, y2] = point(j);
    svg.appendChild(
      svgEl("line", {
        x1: String(x1),
        y1: String(y1),
        x2: String(x2),
        y2: String(y2),
        class: "edge",
      }),
    );
    for (const el of edgeDecorations(i, j, edge.amp)) {
      svg.appendChild(el);
    }
    for (const el of edgeDecorations(j, i, edge.amp_back)) {
      svg.appendChild(el);
    }
  }

  const legal = new Set(snap.legal.map(String));
  const suggestionSteps = new Map<string, number[]>();
  if (state.showSuggestion && state.suggestion) {
    state.suggestion.forEach((node, stepIdx) => {
      const key = String(node);
      if (!suggestionSteps.has(key)) {
        suggestionSteps.set(key, []);
      }
      suggestionSteps.get(key)!.push(stepIdx + 1);
    });
  }

  snap.nodes.forEach((node, i) => {
    const [x, y] = point(i);
    const isLegal = legal.has(String(node)) && !state.busy;
    const group = svgEl("g", {
      "data-node": String(node),
      class: `node${isLegal ? " legal" : " unclickable"}`,
    });
    const value = snap.values[i]!;
    const circle = svgEl("circle", {
      cx: String(x),
      cy: String(y),
      r: "36",
      class: isLegal ? "node-circle legal" : "node-circle",
    });
    const title = svgEl("title", {}, `${String(node)} = ${String(value)}`);
    circle.appendChild(title);
    group.appendChild(circle);
    group.appendChild(
      svgEl(
        "text",
        { x: String(x), y: String(y + 5), "text-anchor": "middle", "data-role": "value" },
        formatValue(value),
      ),
    );
    group.appendChild(
      svgEl(
        "text",
        { x: String(x), y: String(y - 44), "text-anchor": "middle", class: "node-name" },
        String(node),
      ),
    );
    const steps = suggestionSteps.get(String(node));
    if (steps) {
      group.appendChild(
        svgEl(
          "text",
          {
            x: String(x + 40),
            y: String(y - 28),
            class: "suggestion-badge",
            "data-role": "suggestion-step",
          },
          steps.join(","),
        ),
      );
    }
    if (isLegal) {
      group.addEventListener("click", () => handlers.onFire(node));
    }
    svg.appendChild(group);
  });
  return svg;
}

function renderSparkline(history: number[]): SVGElement {
  const width = 220;
  const height = 48;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    "data-role": "sparkline",
  });
  svg.setAttribute("data-points", JSON.stringify(history));
  if (history.length >= 1) {
    const lo = Math.min(...history);
    const hi = Math.max(...history);
    const span = hi - lo || 1;
    const step = history.length > 1 ? width / (history.length - 1) : 0;
    const points = history
      .map((v, i) => `${(i * step).toFixed(2)},${(height - 6 - ((v - lo) / span) * (height - 12)).toFixed(2)}`)
      .join(" ");
    svg.appendChild(svgEl("polyline", { points, class: "sparkline-path" }));
  }
  return svg;
}

export function render(root: HTMLElement, state: ViewState, handlers: Handlers): void {
  root.textContent = "";
  const container = htmlEl("div", { class: "egame-board" });

  const banner = htmlEl("div", { "data-role": "banner", class: "banner" });
  if (state.error) {
    banner.appendChild(htmlEl("span", { "data-role": "banner-text" }, state.error));
    const dismiss = htmlEl("button", { "data-role": "dismiss" }, "dismiss");
    dismiss.addEventListener("click", () => handlers.onDismissError());
    banner.appendChild(dismiss);
  } else {
    banner.setAttribute("hidden", "hidden");
  }
  container.appendChild(banner);

  if (!state.snapshot) {
    container.appendChild(htmlEl("div", { "data-role": "loading" }, "loading…"));
    root.appendChild(container);
    return;
  }
  const snap = state.snapshot;

  const badge = htmlEl("div", { "data-role": "badge", class: "badge" });
  if (snap.condition_star) {
    const holds = snap.condition_star.holds;
    badge.classList.add(holds ? "holds" : "fails");
    badge.appendChild(
      htmlEl(
        "span",
        { "data-role": "condition" },
        `condition (*) ${holds ? "holds" : "fails"} · linear form ${formatValue(
          snap.condition_star.linear_form,
        )}`,
      ),
    );
    if (!holds && state.hint) {
      badge.appendChild(htmlEl("span", { "data-role": "hint" }, ` — ${state.hint}`));
    }
  } else {
    badge.appendChild(htmlEl("span", { "data-role": "condition" }, "no certificate analysis"));
  }
  container.appendChild(badge);

  container.appendChild(renderBoardSvg(state, handlers));

  const controls = htmlEl("div", { class: "controls" });
  const undo = htmlEl("button", { "data-role": "undo" }, "Undo");
  if (state.busy || snap.move_count === 0) {
    undo.setAttribute("disabled", "disabled");
  }
  undo.addEventListener("click", () => handlers.onUndo());
  controls.appendChild(undo);
  const suggest = htmlEl(
    "button",
    { "data-role": "suggest" },
    state.showSuggestion ? "Hide suggested sequence" : "Show suggested sequence",
  );
  if (state.busy) {
    suggest.setAttribute("disabled", "disabled");
  }
  suggest.addEventListener("click", () => handlers.onToggleSuggestion());
  controls.appendChild(suggest);
  controls.appendChild(
    htmlEl("span", { "data-role": "movecount" }, `move ${snap.move_count}`),
  );
  container.appendChild(controls);

  container.appendChild(renderSparkline(state.formHistory));

  const historyStrip = htmlEl("div", { "data-role": "history", class: "history" });
  state.fired.forEach((node, i) => {
    historyStrip.appendChild(htmlEl("span", { class: "chip" }, `${i + 1}:${String(node)}`));
  });
  container.appendChild(historyStrip);

  root.appendChild(container);
}
