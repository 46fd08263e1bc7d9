"""Edge-weighted graphs for the numbers game.

An E-GCM graph carries, for every adjacent pair of nodes, a pair of positive
directed amplitudes.  Firing a node with value v negates that value and adds
``amp(node -> neighbor) * v`` to each neighbor.  A node pair is *odd-neighborly*
when the product of its two amplitudes equals ``4*cos^2(pi/m)`` for an odd
integer m >= 3; three-node cyclic graphs in which all pairs are odd-neighborly
are the family that supports divergence certificates (see ``egame.divergence``).

Graphs are immutable values after construction and safe to share across
threads.  Node identifiers are kept exactly as supplied (strings or numbers);
"smallest identifier" always means earliest in the declared node order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

NodeId = Any

# Tolerance for "amplitude product equals 4*cos^2(pi/m)" with a declared m.
M_PRODUCT_TOL = 1e-12
# Residual allowed on pi/arccos(sqrt(product)/2) before rounding to an integer m.
M_RECOVERY_TOL = 1e-6


class GraphError(ValueError):
    """Base class for graph construction and validation failures."""


class GraphStructureError(GraphError):
    """The graph's shape or data rules out the requested operation."""


class OddNeighborlyError(GraphStructureError):
    """An edge's amplitude product does not correspond to an odd m >= 3."""


class GraphFormatError(GraphError):
    """A graph document could not be parsed; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


# The only integer-valued products; returned exactly so that unit-amplitude
# boards stay on the integer grid under firing.
_EXACT_PRODUCTS = {2: 0.0, 3: 1.0, 4: 2.0, 6: 3.0}


def amplitude_product_for_m(m: int) -> float:
    """Amplitude product ``4*cos^2(pi/m)`` of a node pair with bond order m.

    Strictly increasing in m, with limit 4; equals 1 at m=3 and 0 at m=2.
    """
    if not isinstance(m, int) or isinstance(m, bool) or m < 2:
        raise GraphStructureError(f"bond order must be an integer >= 2, got {m!r}")
    if m in _EXACT_PRODUCTS:
        return _EXACT_PRODUCTS[m]
    return 4.0 * math.cos(math.pi / m) ** 2


def recover_m(product: float, tol: float = M_RECOVERY_TOL) -> int | None:
    """Integer m with ``4*cos^2(pi/m) == product``, or None if there is none.

    The candidate is ``round(pi / arccos(sqrt(product)/2))``; it is accepted
    only when the pre-rounding value sits within ``tol`` of the integer.
    """
    if not (0.0 <= product < 4.0):
        return None
    m_real = math.pi / math.acos(math.sqrt(product) / 2.0)
    m = round(m_real)
    if m < 2 or abs(m_real - m) > tol:
        return None
    return m


class EGCMGraph:
    """A numbers-game board: nodes plus paired directed edge amplitudes.

    ``edges`` entries are ``(u, v, amp_uv, amp_vu)`` or
    ``(u, v, amp_uv, amp_vu, m)`` where ``amp_uv`` is the magnitude carried
    from u to v when u fires.  Both amplitudes of a pair must be strictly
    positive, adjacency is symmetric and irreflexive, and a declared m must
    reproduce the amplitude product to within ``M_PRODUCT_TOL``.
    """

    def __init__(self, nodes: Sequence[NodeId], edges: Iterable[tuple]):
        self.nodes: tuple[NodeId, ...] = tuple(nodes)
        if len(set(map(repr, self.nodes))) != len(self.nodes):
            raise GraphStructureError("duplicate node identifiers")
        self._index = {u: i for i, u in enumerate(self.nodes)}
        self._amp: dict[tuple[int, int], float] = {}
        self._edge_m: dict[tuple[int, int], int] = {}

        for entry in edges:
            if len(entry) == 4:
                u, v, amp_uv, amp_vu = entry
                m = None
            elif len(entry) == 5:
                u, v, amp_uv, amp_vu, m = entry
            else:
                raise GraphStructureError(f"edge entry must have 4 or 5 fields, got {entry!r}")
            if u not in self._index or v not in self._index:
                raise GraphStructureError(f"edge references unknown node: {u!r} or {v!r}")
            i, j = self._index[u], self._index[v]
            if i == j:
                raise GraphStructureError(f"self-loop at node {u!r}")
            if (i, j) in self._amp:
                raise GraphStructureError(f"duplicate edge between {u!r} and {v!r}")
            fwd, back = float(amp_uv), float(amp_vu)
            for label, a in (("amp", fwd), ("amp_back", back)):
                if not math.isfinite(a) or a <= 0.0:
                    raise GraphStructureError(
                        f"{label} on edge {u!r}->{v!r} must be a positive finite number, got {a!r}"
                    )
            self._amp[(i, j)] = fwd
            self._amp[(j, i)] = back
            if m is not None:
                m = int(m)
                if m < 2:
                    raise GraphStructureError(f"declared m on edge {u!r}-{v!r} must be >= 2")
                expected = amplitude_product_for_m(m)
                if abs(fwd * back - expected) > M_PRODUCT_TOL:
                    raise GraphStructureError(
                        f"edge {u!r}-{v!r}: amplitude product {fwd * back!r} does not match "
                        f"4cos^2(pi/{m}) = {expected!r}"
                    )
                self._edge_m[(min(i, j), max(i, j))] = m

        # Per-node neighbor lists (target index, outgoing amplitude) for the engine.
        neigh: list[list[tuple[int, float]]] = [[] for _ in self.nodes]
        for (i, j), a in self._amp.items():
            neigh[i].append((j, a))
        self.neighbors: tuple[tuple[tuple[int, float], ...], ...] = tuple(
            tuple(sorted(lst)) for lst in neigh
        )

    # -- basic queries -------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def index(self, node: NodeId) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise GraphStructureError(f"unknown node {node!r}") from None

    def amp(self, i: int, j: int) -> float:
        """Amplitude carried from node index i to node index j."""
        return self._amp[(i, j)]

    def amplitude(self, u: NodeId, v: NodeId) -> float:
        return self._amp[(self.index(u), self.index(v))]

    def adjacent(self, i: int, j: int) -> bool:
        return (i, j) in self._amp

    def declared_m(self, i: int, j: int) -> int | None:
        return self._edge_m.get((min(i, j), max(i, j)))

    def edge_pairs(self) -> list[tuple[int, int]]:
        """Adjacent index pairs (i, j) with i < j, in declaration order."""
        return sorted({(min(i, j), max(i, j)) for (i, j) in self._amp})

    @property
    def is_triangle(self) -> bool:
        return self.node_count == 3 and len(self.edge_pairs()) == 3

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EGCMGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self._amp == other._amp
            and self._edge_m == other._edge_m
        )

    def __repr__(self) -> str:
        return f"EGCMGraph(nodes={self.nodes!r}, edges={len(self.edge_pairs())})"

    # -- serialization -------------------------------------------------------

    def to_spec(self) -> dict:
        """JSON-ready document: {"nodes": [...], "edges": [{"from", "to", "amp", "amp_back", "m"?}]}."""
        edges = []
        for i, j in self.edge_pairs():
            doc = {
                "from": self.nodes[i],
                "to": self.nodes[j],
                "amp": self._amp[(i, j)],
                "amp_back": self._amp[(j, i)],
            }
            m = self.declared_m(i, j)
            if m is not None:
                doc["m"] = m
            edges.append(doc)
        return {"nodes": list(self.nodes), "edges": edges}

    @classmethod
    def from_spec(cls, spec: Mapping) -> "EGCMGraph":
        problems = spec_problems(spec)
        if problems:
            raise GraphStructureError("; ".join(problems))
        edges = []
        for e in spec["edges"]:
            entry = (e["from"], e["to"], e["amp"], e["amp_back"])
            if "m" in e and e["m"] is not None:
                entry = entry + (e["m"],)
            edges.append(entry)
        return cls(spec["nodes"], edges)


def spec_problems(spec: Mapping) -> list[str]:
    """Structural problems of a raw graph document, as field-path messages."""
    problems: list[str] = []
    if not isinstance(spec, Mapping):
        return ["document must be a JSON object"]
    nodes = spec.get("nodes")
    if not isinstance(nodes, (list, tuple)) or not nodes:
        problems.append("nodes: must be a non-empty list")
        nodes = []
    edges = spec.get("edges")
    if not isinstance(edges, (list, tuple)):
        problems.append("edges: must be a list")
        edges = []
    node_set = {repr(n) for n in nodes}
    if len(node_set) != len(nodes):
        problems.append("nodes: duplicate identifiers")
    for idx, e in enumerate(edges):
        path = f"edges[{idx}]"
        if not isinstance(e, Mapping):
            problems.append(f"{path}: must be an object")
            continue
        for key in ("from", "to"):
            if key not in e:
                problems.append(f"{path}.{key}: missing")
            elif repr(e[key]) not in node_set:
                problems.append(f"{path}.{key}: unknown node {e[key]!r}")
        for key in ("amp", "amp_back"):
            if key not in e:
                problems.append(f"{path}.{key}: missing")
                continue
            try:
                a = float(e[key])
            except (TypeError, ValueError):
                problems.append(f"{path}.{key}: not a number")
                continue
            if not math.isfinite(a) or a <= 0.0:
                problems.append(f"{path}.{key}: must be positive and finite, got {e[key]!r}")
        if "from" in e and "to" in e and repr(e["from"]) == repr(e["to"]):
            problems.append(f"{path}: self-loop at {e['from']!r}")
        if "m" in e and e["m"] is not None:
            m = e["m"]
            if not isinstance(m, int) or isinstance(m, bool) or m < 2:
                problems.append(f"{path}.m: must be an integer >= 2")
            elif "amp" in e and "amp_back" in e:
                try:
                    prod = float(e["amp"]) * float(e["amp_back"])
                except (TypeError, ValueError):
                    prod = None
                if prod is not None and abs(prod - amplitude_product_for_m(m)) > M_PRODUCT_TOL:
                    problems.append(
                        f"{path}.m: amplitude product {prod!r} does not match 4cos^2(pi/{m})"
                    )
    seen_pairs = set()
    for idx, e in enumerate(edges):
        if isinstance(e, Mapping) and "from" in e and "to" in e:
            pair = frozenset((repr(e["from"]), repr(e["to"])))
            if pair in seen_pairs:
                problems.append(f"edges[{idx}]: duplicate edge {e['from']!r}-{e['to']!r}")
            seen_pairs.add(pair)
    return problems


def load_graph(path: str) -> EGCMGraph:
    """Load a graph document from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    return EGCMGraph.from_spec(spec)


def save_graph(graph: EGCMGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph.to_spec(), fh, indent=2)
        fh.write("\n")


def make_cyclic3(
    m12: int,
    m13: int,
    m23: int,
    splits: Sequence[float] = (1.0, 1.0, 1.0),
    nodes: Sequence[NodeId] = ("g1", "g2", "g3"),
) -> EGCMGraph:
    """Build a three-node cyclic graph with odd-neighborly pairs.

    Each edge's directed amplitudes are ``s * sqrt(P)`` (lower-indexed node
    outgoing) and ``sqrt(P) / s`` where ``P = 4*cos^2(pi/m)`` for that edge's
    m, so the amplitude product is P for any split s and split 1 gives the
    symmetric choice.  ``splits`` follows edge order (1-2, 1-3, 2-3).
    """
    ms = (m12, m13, m23)
    for m in ms:
        if not isinstance(m, int) or isinstance(m, bool) or m < 3 or m % 2 == 0:
            raise OddNeighborlyError(f"odd-neighborly required: every m must be odd and >= 3, got {m!r}")
    if len(splits) != 3:
        raise GraphStructureError("splits must supply one value per edge")
    for s in splits:
        if not math.isfinite(s) or s <= 0.0:
            raise GraphStructureError(f"split must be positive and finite, got {s!r}")
    if len(nodes) != 3:
        raise GraphStructureError("exactly three nodes required")
    pairs = ((0, 1), (0, 2), (1, 2))
    edges = []
    for (i, j), m, s in zip(pairs, ms, splits):
        root = math.sqrt(amplitude_product_for_m(m))
        edges.append((nodes[i], nodes[j], s * root, root / s, m))
    return EGCMGraph(nodes, edges)


@dataclass(frozen=True)
class TriangleLabels:
    """Canonical role assignment on an odd-neighborly triangle.

    ``p`` is carried gamma1->gamma2, ``q`` gamma2->gamma1, ``p1`` gamma1->gamma3,
    ``q1`` gamma3->gamma1, ``p2`` gamma2->gamma3, ``q2`` gamma3->gamma2.  Canonical
    labels put the edge of minimal amplitude product on the gamma1-gamma2 pair,
    so ``p*q <= p1*q1`` and ``p*q <= p2*q2``, with ``1 <= p*q < 4``.
    """

    gamma1: NodeId
    gamma2: NodeId
    gamma3: NodeId
    p: float
    q: float
    p1: float
    q1: float
    p2: float
    q2: float

    ORDER_TOL = 1e-9

    @property
    def gammas(self) -> tuple[NodeId, NodeId, NodeId]:
        return (self.gamma1, self.gamma2, self.gamma3)

    @property
    def pq(self) -> float:
        return self.p * self.q

    @property
    def sqrt_pq(self) -> float:
        return math.sqrt(self.p * self.q)

    def m12(self, tol: float = M_RECOVERY_TOL) -> int:
        """Bond order of the gamma1-gamma2 pair, recovered from the amplitudes."""
        m = recover_m(self.p * self.q, tol)
        if m is None or m % 2 == 0 or m < 3:
            raise OddNeighborlyError(
                f"gamma1-gamma2 amplitude product {self.p * self.q!r} is not 4cos^2(pi/m) "
                "for an odd m >= 3"
            )
        return m

    def kappas(self) -> tuple[float, float]:
        """The pair of growth coefficients used by condition (*) and the half-word matrix."""
        r = self.sqrt_pq
        denom = r * (2.0 - r)
        if denom <= 0.0:
            raise GraphStructureError(
                f"amplitude product p*q = {self.pq!r} must lie in (0, 4) for the kappas"
            )
        k1 = (self.p * self.p2 + self.p1 * r) / denom
        k2 = (self.q * self.p1 + self.p2 * r) / denom
        return k1, k2

    def cstars(self) -> tuple[float, float]:
        """Coefficients of the condition-(*) linear form: kappa_i minus the cross term."""
        k1, k2 = self.kappas()
        r = self.sqrt_pq
        return k1 - self.p / (self.q2 * r), k2 - self.q / (self.q1 * r)

    def check(self) -> None:
        """Raise unless the canonical-ordering invariants hold."""
        for name in ("p", "q", "p1", "q1", "p2", "q2"):
            a = getattr(self, name)
            if not math.isfinite(a) or a <= 0.0:
                raise GraphStructureError(f"label {name} must be positive, got {a!r}")
        pq = self.pq
        tol = self.ORDER_TOL
        if pq > self.p1 * self.q1 + tol or pq > self.p2 * self.q2 + tol:
            raise GraphStructureError(
                f"canonical ordering violated: p*q = {pq!r} exceeds a side product"
            )
        if pq < 1.0 - tol or pq >= 4.0:
            raise GraphStructureError(f"p*q = {pq!r} must lie in [1, 4)")

    def to_graph(self) -> EGCMGraph:
        """Rebuild the labeled triangle with nodes in (gamma1, gamma2, gamma3) order."""
        def with_m(u, v, fwd, back):
            entry = (u, v, fwd, back)
            m = recover_m(fwd * back)
            return entry + (m,) if m is not None else entry

        return EGCMGraph(
            self.gammas,
            [
                with_m(self.gamma1, self.gamma2, self.p, self.q),
                with_m(self.gamma1, self.gamma3, self.p1, self.q1),
                with_m(self.gamma2, self.gamma3, self.p2, self.q2),
            ],
        )


def labels_for_roles(graph: EGCMGraph, i1: int, i2: int, i3: int) -> TriangleLabels:
    """Read off the six amplitudes with node index i1 as gamma1, etc."""
    return TriangleLabels(
        gamma1=graph.nodes[i1],
        gamma2=graph.nodes[i2],
        gamma3=graph.nodes[i3],
        p=graph.amp(i1, i2),
        q=graph.amp(i2, i1),
        p1=graph.amp(i1, i3),
        q1=graph.amp(i3, i1),
        p2=graph.amp(i2, i3),
        q2=graph.amp(i3, i2),
    )


def canonicalize_triangle(graph: EGCMGraph) -> TriangleLabels:
    """Assign gamma roles so the minimal-product edge becomes the gamma1-gamma2 pair.

    Ties are broken toward the earliest declared node identifiers; within the
    chosen edge, gamma1 is the earlier-declared endpoint.  Requires a triangle
    in which every pair is odd-neighborly.
    """
    if not graph.is_triangle:
        raise GraphStructureError("canonical labels require a three-node triangle")
    products = {}
    for i, j in graph.edge_pairs():
        prod = graph.amp(i, j) * graph.amp(j, i)
        m = recover_m(prod)
        if m is None or m % 2 == 0 or m < 3:
            raise OddNeighborlyError(
                f"pair {graph.nodes[i]!r}-{graph.nodes[j]!r}: product {prod!r} is not "
                "4cos^2(pi/m) for an odd m >= 3"
            )
        products[(i, j)] = prod
    best = min(products.values())
    i1, i2 = min(pair for pair, prod in products.items() if prod <= best + M_PRODUCT_TOL)
    (i3,) = set(range(3)) - {i1, i2}
    labels = labels_for_roles(graph, i1, i2, i3)
    labels.check()
    return labels


# -- validation reports ------------------------------------------------------


@dataclass
class EdgeReport:
    u: NodeId
    v: NodeId
    amp_uv: float | None
    amp_vu: float | None
    positive: bool
    product: float | None
    declared_m: int | None
    declared_m_ok: bool
    recovered_m: int | None
    odd_neighborly: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ValidationReport:
    nodes: list[NodeId]
    edges: list[EdgeReport]
    problems: list[str]
    engine_playable: bool
    is_triangle: bool
    all_pairs_odd_neighborly: bool
    certificate_eligible: bool

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [e.to_dict() for e in self.edges],
            "problems": list(self.problems),
            "engine_playable": self.engine_playable,
            "is_triangle": self.is_triangle,
            "all_pairs_odd_neighborly": self.all_pairs_odd_neighborly,
            "certificate_eligible": self.certificate_eligible,
        }


def validate_spec(spec: Mapping) -> ValidationReport:
    """Report on a raw graph document without constructing it.

    Never raises: structural failures (missing reverse amplitudes, zero or
    negative amplitudes, inconsistent declared m) land in ``problems`` and the
    per-edge reports.
    """
    problems = spec_problems(spec)
    nodes = list(spec.get("nodes") or []) if isinstance(spec, Mapping) else []
    raw_edges = list(spec.get("edges") or []) if isinstance(spec, Mapping) else []
    edges: list[EdgeReport] = []
    for e in raw_edges:
        if not isinstance(e, Mapping):
            continue

        def as_amp(key):
            try:
                a = float(e[key])
            except (KeyError, TypeError, ValueError):
                return None
            return a if math.isfinite(a) else None

        fwd, back = as_amp("amp"), as_amp("amp_back")
        positive = fwd is not None and back is not None and fwd > 0.0 and back > 0.0
        product = fwd * back if positive else None
        declared = e.get("m")
        if not isinstance(declared, int) or isinstance(declared, bool):
            declared = None
        declared_ok = True
        if declared is not None:
            declared_ok = (
                declared >= 2
                and product is not None
                and abs(product - amplitude_product_for_m(declared)) <= M_PRODUCT_TOL
            )
        recovered = recover_m(product) if product is not None else None
        odd = recovered is not None and recovered >= 3 and recovered % 2 == 1
        edges.append(
            EdgeReport(
                u=e.get("from"),
                v=e.get("to"),
                amp_uv=fwd,
                amp_vu=back,
                positive=positive,
                product=product,
                declared_m=declared,
                declared_m_ok=declared_ok,
                recovered_m=recovered,
                odd_neighborly=odd,
            )
        )
    playable = not problems
    is_triangle = (
        playable
        and len(nodes) == 3
        and len(edges) == 3
        and len({frozenset((repr(e.u), repr(e.v))) for e in edges}) == 3
    )
    all_odd = bool(edges) and all(e.odd_neighborly for e in edges)
    return ValidationReport(
        nodes=nodes,
        edges=edges,
        problems=problems,
        engine_playable=playable,
        is_triangle=is_triangle,
        all_pairs_odd_neighborly=all_odd,
        certificate_eligible=is_triangle and all_odd,
    )


def validate(graph_or_spec: "EGCMGraph | Mapping") -> ValidationReport:
    """Validation report for a constructed graph or a raw graph document."""
    if isinstance(graph_or_spec, EGCMGraph):
        return validate_spec(graph_or_spec.to_spec())
    return validate_spec(graph_or_spec)
