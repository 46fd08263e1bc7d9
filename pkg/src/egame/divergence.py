"""Divergence certificates for odd-neighborly three-node cyclic graphs.

The machinery works in the canonical label frame of ``TriangleLabels``:
positions are triples (a, b, c) of the values at gamma1, gamma2, gamma3.
Condition (*) -- a >= 0, b >= 0, c <= 0 and cstar1*a + cstar2*b + c strictly
positive -- is the invariant that sustains divergence: from any position
meeting it, the alternating gamma1/gamma2 block followed by a gamma3 firing
(one *macro-cycle*) lands on another position meeting it, with no zero
entries.  A certificate checks this from every fundamental position, which is
what non-admissibility of the graph reduces to.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from . import matrices
from .engine import EPS_LEGAL, FiringEvent, apply_sequence, fire
from .graph import (
    EGCMGraph,
    GraphStructureError,
    TriangleLabels,
    canonicalize_triangle,
    validate,
)

# Agreement tolerance between closed forms and engine simulation.
SIM_TOL = 1e-9
# Slack on the unit lower bounds of the growth inequalities: the all-m=3
# family sits exactly on the boundary, so pure roundoff must not fail it.
INEQ_TOL = 1e-9

DEFAULT_N_CYCLES = 25


class CertificateError(ValueError):
    """Base class for certificate failures."""


class IneligibleGraphError(CertificateError):
    """The graph is outside the certified family (not an odd-neighborly triangle)."""


class ConditionStarError(CertificateError):
    """An operation needed condition (*) to hold and it did not."""


class VerificationError(CertificateError):
    """An internal cross-check failed; indicates an implementation bug."""


Triple = tuple  # (a, b, c) in canonical label order


def _vclose(xs: Sequence[float], ys: Sequence[float]) -> bool:
    # Witness positions grow geometrically across macro-cycles and simulation
    # error is carried at the position's overall magnitude, so agreement is
    # absolute near unit scale and relative to the largest coordinate beyond.
    scale = max(1.0, *(abs(v) for v in xs), *(abs(v) for v in ys))
    return all(abs(x - y) <= SIM_TOL * scale for x, y in zip(xs, ys))


def kappas(labels: TriangleLabels) -> tuple[float, float]:
    """Growth coefficients (kappa1, kappa2); strictly positive for valid labels."""
    return labels.kappas()


@dataclass(frozen=True)
class ConditionStarStatus:
    sign_ok: bool
    linear_form: float
    holds: bool


def linear_form(labels: TriangleLabels, triple: Sequence[float]) -> float:
    cs1, cs2 = labels.cstars()
    a, b, c = triple
    return cs1 * a + cs2 * b + c


def condition_star(labels: TriangleLabels, triple: Sequence[float]) -> ConditionStarStatus:
    """Evaluate condition (*) at (a, b, c): signs plus the linear form."""
    a, b, c = (float(x) for x in triple)
    sign_ok = a >= 0.0 and b >= 0.0 and c <= 0.0
    form = linear_form(labels, (a, b, c))
    return ConditionStarStatus(sign_ok=sign_ok, linear_form=form, holds=sign_ok and form > EPS_LEGAL)


def alternating_sequence(labels: TriangleLabels, triple: Sequence[float]) -> tuple:
    """Firing order of the alternating gamma1/gamma2 block from (a, b, c).

    With both a and b positive the block has length m12 and starts and ends at
    gamma1; with exactly one of them positive it has length m12 - 1 and starts
    at the positive one.  Requires condition (*).
    """
    status = condition_star(labels, triple)
    if not status.holds:
        raise ConditionStarError(
            f"condition (*) fails at {tuple(triple)!r}: sign_ok={status.sign_ok}, "
            f"linear form {status.linear_form!r}"
        )
    m = labels.m12()
    a, b, _ = triple
    g1, g2 = labels.gamma1, labels.gamma2
    half = (m - 1) // 2
    if a > EPS_LEGAL and b > EPS_LEGAL:
        return tuple([g1, g2] * half + [g1])
    if a > EPS_LEGAL:
        return tuple([g1, g2] * half)
    return tuple([g2, g1] * half)


def alternation_image(labels: TriangleLabels, triple: Sequence[float]) -> Triple:
    """Endpoint of the alternating block, from the half-word closed form.

    Always (-q*b/sqrt(pq), -p*a/sqrt(pq), kappa1*a + kappa2*b + c); the first
    two entries come out <= 0 and the third > 0 under condition (*).
    """
    status = condition_star(labels, triple)
    if not status.holds:
        raise ConditionStarError(f"condition (*) fails at {tuple(triple)!r}")
    a, b, c = triple
    r = labels.sqrt_pq
    k1, k2 = labels.kappas()
    return (-labels.q * b / r, -labels.p * a / r, k1 * a + k2 * b + c)


def macro_cycle(labels: TriangleLabels, triple: Sequence[float]) -> Triple:
    """One macro-cycle: the alternating block followed by firing gamma3.

    Closed form: (q1*[kappa1*a + cstar2*b + c], q2*[cstar1*a + kappa2*b + c],
    -(kappa1*a + kappa2*b + c)).  The output meets condition (*) again with no
    zero entries, which is what makes the cycle repeatable forever.
    """
    status = condition_star(labels, triple)
    if not status.holds:
        raise ConditionStarError(f"condition (*) fails at {tuple(triple)!r}")
    a, b, c = triple
    k1, k2 = labels.kappas()
    cs1, cs2 = labels.cstars()
    return (
        labels.q1 * (k1 * a + cs2 * b + c),
        labels.q2 * (cs1 * a + k2 * b + c),
        -(k1 * a + k2 * b + c),
    )


def inequalities(labels: TriangleLabels) -> tuple[float, float, float]:
    """The three certificate inequalities (q1*cstar1, q2*cstar2, their sum minus 1).

    For canonically ordered labels the first two are >= 1 and the third > 0;
    values below that (beyond roundoff slack) mean the labels are invalid and
    raise.  The all-m=3 family sits exactly at (1, 1, 1).
    """
    cs1, cs2 = labels.cstars()
    one = labels.q1 * cs1
    two = labels.q2 * cs2
    three = one + two - 1.0
    if one < 1.0 - INEQ_TOL or two < 1.0 - INEQ_TOL or three <= 0.0:
        raise CertificateError(
            f"growth inequalities violated: ({one!r}, {two!r}, {three!r}); "
            "the gamma1-gamma2 pair must carry the minimal amplitude product"
        )
    return one, two, three


def form_recursion_residual(labels: TriangleLabels, triple: Sequence[float]) -> float:
    """Residual of the linear-form recursion across one macro-cycle.

    For any reals (a, b, c) -- condition (*) not required -- the form at the
    macro-cycle image equals
    ``iii * form(a, b, c) + (p/(q2*sqrt(pq)))*(i - 1)*a + (q/(q1*sqrt(pq)))*(ii - 1)*b``
    where (i, ii, iii) are the growth inequalities.  The identity is exact
    algebra, so the absolute residual stays at roundoff scale.
    """
    a, b, c = (float(x) for x in triple)
    k1, k2 = labels.kappas()
    cs1, cs2 = labels.cstars()
    r = labels.sqrt_pq
    a1 = labels.q1 * (k1 * a + cs2 * b + c)
    b1 = labels.q2 * (cs1 * a + k2 * b + c)
    c1 = -(k1 * a + k2 * b + c)
    lhs = cs1 * a1 + cs2 * b1 + c1
    one = labels.q1 * cs1
    two = labels.q2 * cs2
    three = one + two - 1.0
    rhs = (
        cs1 * three * a
        + cs2 * three * b
        + three * c
        + (labels.p / (labels.q2 * r)) * (one - 1.0) * a
        + (labels.q / (labels.q1 * r)) * (two - 1.0) * b
    )
    return abs(lhs - rhs)


def legality_audit(labels: TriangleLabels, triple: Sequence[float]) -> list[float]:
    """Pairing value of each firing in the alternating block, checked two ways.

    Every prefix value is computed by engine simulation and by the closed-form
    matrix column for that prefix; the two must agree to SIM_TOL and all values
    must be positive, otherwise VerificationError.
    """
    seq = alternating_sequence(labels, triple)
    graph = labels.to_graph()
    pos = tuple(float(x) for x in triple)
    engine_vals: list[float] = []
    for node in seq:
        idx = graph.index(node)
        engine_vals.append(pos[idx])
        pos = fire(graph, pos, node)

    case_iii = seq and seq[0] == labels.gamma2
    matrix_vals: list[float] = []
    for j, node in enumerate(seq):
        k = j // 2
        if not case_iii:
            if j % 2 == 0:
                mat = matrices.closed_form_power(labels, k, matrices.MatrixKind.ROT12)
                col = 0
            else:
                mat = matrices.prefix_matrix(labels, k, matrices.MatrixKind.PREFIX1_ROT21)
                col = 1
        else:
            if j % 2 == 0:
                mat = matrices.closed_form_power(labels, k, matrices.MatrixKind.ROT21)
                col = 1
            else:
                mat = matrices.prefix_matrix(labels, k, matrices.MatrixKind.PREFIX2_ROT12)
                col = 0
        matrix_vals.append(float(matrices.pairing_values(triple, mat)[col]))

    for j, (ev, mv) in enumerate(zip(engine_vals, matrix_vals)):
        if abs(ev - mv) > SIM_TOL:
            raise VerificationError(
                f"firing {j} ({seq[j]!r}): simulated value {ev!r} vs closed form {mv!r}"
            )
        if mv <= 0.0:
            raise VerificationError(f"firing {j} ({seq[j]!r}): nonpositive pairing value {mv!r}")
    return engine_vals


# -- certificates ---------------------------------------------------------------


@dataclass(frozen=True)
class MacroCycleWitness:
    before: Triple
    sequence: tuple
    after: Triple
    form_before: float
    form_after: float


@dataclass(frozen=True)
class FundamentalWitness:
    name: str
    start: Triple
    preprocessing: tuple            # gamma3 firings needed before condition (*) holds
    start_certified: Triple         # first position meeting condition (*)
    cycles: tuple                   # MacroCycleWitness per macro-cycle


@dataclass(frozen=True)
class DivergenceCertificate:
    graph_spec: dict
    labels: TriangleLabels
    kappa1: float
    kappa2: float
    cstar1: float
    cstar2: float
    ineq_i: float
    ineq_ii: float
    ineq_iii: float
    n_cycles: int
    strict_form_growth: bool        # false exactly on the all-m=3 boundary family
    fundamentals: tuple             # FundamentalWitness per fundamental position
    verdict: str = "not_admissible"

    def to_json_dict(self) -> dict:
        lb = self.labels
        return {
            "schema": "divergence-certificate/1",
            "graph": self.graph_spec,
            "labels": {
                "gamma1": lb.gamma1,
                "gamma2": lb.gamma2,
                "gamma3": lb.gamma3,
                "p": lb.p,
                "q": lb.q,
                "p1": lb.p1,
                "q1": lb.q1,
                "p2": lb.p2,
                "q2": lb.q2,
                "m12": lb.m12(),
            },
            "kappa1": self.kappa1,
            "kappa2": self.kappa2,
            "cstar1": self.cstar1,
            "cstar2": self.cstar2,
            "inequalities": {"i": self.ineq_i, "ii": self.ineq_ii, "iii": self.ineq_iii},
            "n_cycles": self.n_cycles,
            "tolerance": SIM_TOL,
            "strict_form_growth": self.strict_form_growth,
            "fundamentals": [
                {
                    "name": f.name,
                    "start": list(f.start),
                    "preprocessing": list(f.preprocessing),
                    "start_certified": list(f.start_certified),
                    "cycles": [
                        {
                            "before": list(c.before),
                            "sequence": list(c.sequence),
                            "after": list(c.after),
                            "form_before": c.form_before,
                            "form_after": c.form_after,
                        }
                        for c in f.cycles
                    ],
                }
                for f in self.fundamentals
            ],
            "verdict": self.verdict,
            "conclusion": (
                "every fundamental position admits a divergent game sequence, "
                "so the graph is not admissible"
            ),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def _sequence_for(labels: TriangleLabels, a_positive: bool, b_positive: bool) -> tuple:
    m = labels.m12()
    half = (m - 1) // 2
    g1, g2 = labels.gamma1, labels.gamma2
    if a_positive and b_positive:
        return tuple([g1, g2] * half + [g1])
    if a_positive:
        return tuple([g1, g2] * half)
    return tuple([g2, g1] * half)


def _run_cycles(
    labels: TriangleLabels,
    graph: EGCMGraph,
    start_triple: Triple,
    start_form: float,
    n_cycles: int,
    strict_expected: bool,
    crosscheck: bool,
) -> tuple:
    # Witness coordinates can span a wide dynamic range: on the all-m=3
    # boundary some coordinates stay bounded while others grow geometrically,
    # and computing the bounded ones (or the linear form) from the full
    # triple cancels catastrophically at scale.  The carried state is
    # therefore (a, b, form), whose macro-cycle recursions
    #     a' = q1*(form + alpha*a),  b' = q2*(form + beta*b),
    #     form' = iii*form + alpha*(i-1)*a + beta*(ii-1)*b,
    #     c' = -(form + alpha*a + beta*b)
    # are nonnegative combinations of positive quantities.  Each cycle is
    # re-simulated from the carried position and compared at scale-relative
    # tolerance.
    q1v, q2v = labels.q1, labels.q2
    cs1, cs2 = labels.cstars()
    r = labels.sqrt_pq
    alpha = labels.p / (labels.q2 * r)
    beta = labels.q / (labels.q1 * r)
    one, two = q1v * cs1, q2v * cs2
    big_t = one + two - 1.0
    # Exactly zero on the boundary family; clamp away roundoff noise.
    gain_a = max(alpha * (one - 1.0), 0.0)
    gain_b = max(beta * (two - 1.0), 0.0)

    cycles = []
    triple = start_triple
    a, b, form = start_triple[0], start_triple[1], start_form
    for _ in range(n_cycles):
        seq = _sequence_for(labels, a > EPS_LEGAL, b > EPS_LEGAL)
        a2 = q1v * (form + alpha * a)
        b2 = q2v * (form + beta * b)
        c2 = -(form + alpha * a + beta * b)
        form2 = big_t * form + gain_a * a + gain_b * b
        nxt = (a2, b2, c2)
        if not all(math.isfinite(x) for x in nxt):
            raise VerificationError(
                "witness coordinates overflowed double range; reduce n_cycles"
            )
        if crosscheck:
            sim_mid, _ = apply_sequence(graph, triple, seq)
            image = (-labels.q * b / r, -labels.p * a / r, form + alpha * a + beta * b)
            if not _vclose(sim_mid, image):
                raise VerificationError(
                    f"alternating block mismatch at {triple!r}: simulated {sim_mid!r} "
                    f"vs closed form {image!r}"
                )
            sim_next = fire(graph, sim_mid, labels.gamma3)
            if not _vclose(sim_next, nxt):
                raise VerificationError(
                    f"macro-cycle mismatch at {triple!r}: simulated {sim_next!r} "
                    f"vs closed form {nxt!r}"
                )
        if a2 <= EPS_LEGAL or b2 <= EPS_LEGAL or c2 >= -EPS_LEGAL or form2 <= EPS_LEGAL:
            raise VerificationError(
                f"macro-cycle left condition (*): position {nxt!r}, form {form2!r}"
            )
        if form2 < form - SIM_TOL * max(1.0, form):
            raise VerificationError(
                f"linear form decreased across a macro-cycle: {form!r} -> {form2!r}"
            )
        if strict_expected and form2 <= form:
            raise VerificationError(
                f"linear form failed to increase strictly: {form!r} -> {form2!r}"
            )
        cycles.append(
            MacroCycleWitness(
                before=triple, sequence=seq, after=nxt, form_before=form, form_after=form2
            )
        )
        triple = nxt
        a, b, form = a2, b2, form2
    return tuple(cycles)


def divergence_certificate(
    graph: EGCMGraph,
    n_cycles: int = DEFAULT_N_CYCLES,
    crosscheck: bool = True,
) -> DivergenceCertificate:
    """Certify that the graph is not admissible.

    Requires an odd-neighborly triangle.  The fundamental positions at gamma1
    and gamma2 meet condition (*) outright; the one at gamma3 needs a single
    gamma3 firing first (landing on (q1, q2, -1), covered by the third
    inequality).  From each, ``n_cycles`` macro-cycles are replayed with the
    closed forms checked against engine simulation, condition (*) re-verified,
    and the linear form required never to decrease -- strictly increasing
    unless the graph sits on the all-m=3 boundary where the form is constant.
    """
    if n_cycles < 1:
        raise CertificateError(f"n_cycles must be >= 1, got {n_cycles}")
    report = validate(graph)
    if not report.certificate_eligible:
        raise IneligibleGraphError(
            "certificates need a triangle with all pairs odd-neighborly; problems: "
            + "; ".join(report.problems or ["not an odd-neighborly triangle"])
        )
    labels = canonicalize_triangle(graph)
    labels.check()
    k1, k2 = labels.kappas()
    cs1, cs2 = labels.cstars()
    one, two, three = inequalities(labels)
    # Strict growth of the form holds iff iii > 1; equality (iii == 1) happens
    # exactly when both unit inequalities are tight, i.e. every m equals 3.
    strict = three > 1.0 + INEQ_TOL
    canonical = labels.to_graph()

    fundamentals = []
    for name, start, form0 in (
        ("omega1", (1.0, 0.0, 0.0), cs1),
        ("omega2", (0.0, 1.0, 0.0), cs2),
        ("omega3", (0.0, 0.0, 1.0), three),
    ):
        pre: tuple = ()
        certified = start
        status = condition_star(labels, start)
        if not status.holds:
            if start[2] <= EPS_LEGAL:
                raise VerificationError(f"{name}: condition (*) unexpectedly fails at {start!r}")
            certified = fire(canonical, start, labels.gamma3)
            pre = (labels.gamma3,)
            expected = (labels.q1, labels.q2, -1.0)
            if not _vclose(certified, expected):
                raise VerificationError(
                    f"{name}: firing gamma3 gave {certified!r}, expected {expected!r}"
                )
            status = condition_star(labels, certified)
            if not status.holds:
                raise VerificationError(
                    f"{name}: condition (*) still fails after firing gamma3: {certified!r}"
                )
        cycles = _run_cycles(labels, canonical, certified, form0, n_cycles, strict, crosscheck)
        fundamentals.append(
            FundamentalWitness(
                name=name,
                start=start,
                preprocessing=pre,
                start_certified=certified,
                cycles=cycles,
            )
        )

    return DivergenceCertificate(
        graph_spec=graph.to_spec(),
        labels=labels,
        kappa1=k1,
        kappa2=k2,
        cstar1=cs1,
        cstar2=cs2,
        ineq_i=one,
        ineq_ii=two,
        ineq_iii=three,
        n_cycles=n_cycles,
        strict_form_growth=strict,
        fundamentals=tuple(fundamentals),
    )


class ScheduleStrategy:
    """Engine strategy replaying the certificate's firing schedule move by move.

    Queues one macro-cycle at a time (alternating block plus gamma3); when
    condition (*) fails but gamma3 is fireable, fires gamma3 alone, which is
    exactly the fundamental-position preprocessing.  Works on any graph that
    contains the labeled triangle's nodes.
    """

    def __init__(self, labels: TriangleLabels, graph: EGCMGraph | None = None):
        self._labels = labels
        self._graph = graph if graph is not None else labels.to_graph()
        self._idx = tuple(self._graph.index(g) for g in labels.gammas)
        self._queue: deque = deque()

    def choose(self, graph, position, legal):
        if not self._queue:
            triple = tuple(position[i] for i in self._idx)
            status = condition_star(self._labels, triple)
            if status.holds:
                self._queue.extend(alternating_sequence(self._labels, triple))
                self._queue.append(self._labels.gamma3)
            elif triple[2] > EPS_LEGAL:
                self._queue.append(self._labels.gamma3)
            else:
                return None
        return self._queue.popleft()


def triple_of(graph: EGCMGraph, labels: TriangleLabels, position: Sequence[float]) -> Triple:
    """Extract (a, b, c) in canonical label order from an engine position."""
    return tuple(position[graph.index(g)] for g in labels.gammas)
