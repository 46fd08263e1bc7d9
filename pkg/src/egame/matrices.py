"""Reflection-word matrices for the gamma1/gamma2 pair of a labeled triangle.

In the coordinate frame spanned by the three node directions, firing a node
pairs a position row vector against matrix columns: after firing the word
w = (n_1, ..., n_l) (in firing order), the value at node i equals
``position_row @ X(n_1) @ ... @ X(n_l) @ e_i``.  Only the generators for
gamma1 and gamma2 are materialized here; gamma3's action stays with the game
engine.  Every matrix fixes the third coordinate line, so all variants carry
an exact (0, 0, 1) third row.

``closed_form_power`` and ``prefix_matrix`` evaluate the trigonometric closed
forms (theta = pi/m12); ``oracle_power`` rebuilds the same words by repeated
explicit multiplication and is kept free of any closed-form shortcut.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .graph import GraphStructureError, TriangleLabels


class MatrixKind(str, Enum):
    GEN1 = "gen1"
    GEN2 = "gen2"
    ROT12 = "rot12"
    ROT21 = "rot21"
    PREFIX2_ROT12 = "prefix2_rot12"
    PREFIX1_ROT21 = "prefix1_rot21"
    HALFWORD = "halfword"


@dataclass(frozen=True, eq=False)
class RepMatrix:
    entries: np.ndarray
    kind: MatrixKind
    k: int | None = None
    theta: float | None = None

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.shape != (3, 3):
            raise GraphStructureError(f"expected a 3x3 matrix, got shape {arr.shape}")
        if not (arr[2, 0] == 0.0 and arr[2, 1] == 0.0 and arr[2, 2] == 1.0):
            raise GraphStructureError("third row must be exactly (0, 0, 1)")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def __matmul__(self, other: "RepMatrix") -> np.ndarray:
        return self.entries @ other.entries


def theta_for(labels: TriangleLabels) -> float:
    """theta = pi / m12, with m12 recovered from the gamma1-gamma2 amplitudes."""
    return math.pi / labels.m12()


def generators(labels: TriangleLabels) -> tuple[RepMatrix, RepMatrix]:
    """The two firing generators for gamma1 and gamma2 (both involutions)."""
    p, q, p1, p2 = labels.p, labels.q, labels.p1, labels.p2
    x1 = RepMatrix(np.array([[-1.0, p, p1], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), MatrixKind.GEN1)
    x2 = RepMatrix(np.array([[1.0, 0.0, 0.0], [q, -1.0, p2], [0.0, 0.0, 1.0]]), MatrixKind.GEN2)
    return x1, x2


def _sines(theta: float, k: int) -> tuple[float, float, float, float]:
    s2t = math.sin(2.0 * theta)
    sk = math.sin(2.0 * k * theta)
    skp = math.sin(2.0 * (k + 1) * theta)
    skm = math.sin(2.0 * (k - 1) * theta)
    return s2t, sk, skp, skm


def _corner_terms(labels: TriangleLabels, theta: float, k: int) -> tuple[float, float, float, float]:
    """Third-column coefficients of the two rotation powers: (c1p, c2p, c1pp, c2pp)."""
    p, q, p1, p2 = labels.p, labels.q, labels.p1, labels.p2
    s2t, sk, skp, skm = _sines(theta, k)
    u = p2 * p + 2.0 * p1
    v = p1 * q + 2.0 * p2
    w = 4.0 - p * q
    rise = (skp + sk) / s2t       # upper-left entry of the forward rotation power
    fall = (sk + skm) / s2t
    c1p = -(u / w) * (rise - 1.0) + p * v * sk / (w * s2t)
    c2p = -q * u * sk / (w * s2t) + (v / w) * (fall + 1.0)
    c1pp = (u / w) * (fall + 1.0) - p * v * sk / (w * s2t)
    c2pp = q * u * sk / (w * s2t) - (v / w) * (rise - 1.0)
    return c1p, c2p, c1pp, c2pp


def closed_form_power(labels: TriangleLabels, k: int, kind: MatrixKind) -> RepMatrix:
    """k-th power of the gamma1-gamma2 rotation (ROT12 = gen1*gen2, ROT21 = gen2*gen1).

    Entries come from the sine formulas in theta = pi/m12; k = 0 yields the
    identity exactly.
    """
    if kind not in (MatrixKind.ROT12, MatrixKind.ROT21):
        raise GraphStructureError(f"closed_form_power expects ROT12 or ROT21, got {kind}")
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise GraphStructureError(f"power k must be a nonnegative integer, got {k!r}")
    p, q = labels.p, labels.q
    theta = theta_for(labels)
    s2t, sk, skp, skm = _sines(theta, k)
    c1p, c2p, c1pp, c2pp = _corner_terms(labels, theta, k)
    # Ratios first so that k = 0 comes out as the exact identity.
    rk, rkp, rkm = sk / s2t, skp / s2t, skm / s2t
    rise = rkp + rk
    fall = -rk - rkm
    if kind is MatrixKind.ROT12:
        entries = [
            [rise, -p * rk, c1p],
            [q * rk, fall, c2p],
            [0.0, 0.0, 1.0],
        ]
    else:
        entries = [
            [fall, p * rk, c1pp],
            [-q * rk, rise, c2pp],
            [0.0, 0.0, 1.0],
        ]
    return RepMatrix(np.array(entries), kind, k=k, theta=theta)


def prefix_matrix(labels: TriangleLabels, k: int, kind: MatrixKind) -> RepMatrix:
    """Closed form of gen2 * rot12^k (PREFIX2_ROT12) or gen1 * rot21^k (PREFIX1_ROT21).

    These are the odd-length prefixes of the alternating firing words; their
    first/second columns carry the legality pairing values.
    """
    if kind not in (MatrixKind.PREFIX2_ROT12, MatrixKind.PREFIX1_ROT21):
        raise GraphStructureError(
            f"prefix_matrix expects PREFIX2_ROT12 or PREFIX1_ROT21, got {kind}"
        )
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise GraphStructureError(f"power k must be a nonnegative integer, got {k!r}")
    p, q, p1, p2 = labels.p, labels.q, labels.p1, labels.p2
    theta = theta_for(labels)
    s2t, sk, skp, skm = _sines(theta, k)
    c1p, c2p, c1pp, c2pp = _corner_terms(labels, theta, k)
    rk, rkp, rkm = sk / s2t, skp / s2t, skm / s2t
    rise = rkp + rk
    mixed = (1.0 - p * q) * rk + rkm
    if kind is MatrixKind.PREFIX2_ROT12:
        entries = [
            [rise, -p * rk, c1p],
            [q * rkp, mixed, q * c1p - c2p + p2],
            [0.0, 0.0, 1.0],
        ]
    else:
        entries = [
            [mixed, p * rkp, -c1pp + p * c2pp + p1],
            [-q * rk, rise, c2pp],
            [0.0, 0.0, 1.0],
        ]
    return RepMatrix(np.array(entries), kind, k=k, theta=theta)


def halfword(labels: TriangleLabels) -> RepMatrix:
    """gen1 * rot21^((m12-1)/2), written directly in terms of the kappas.

    Pairing a position row (a, b, c) against this matrix gives the endpoint of
    the full alternating firing block:
    (-q*b/sqrt(pq), -p*a/sqrt(pq), kappa1*a + kappa2*b + c).
    """
    m = labels.m12()
    k1, k2 = labels.kappas()
    r = labels.sqrt_pq
    entries = [
        [0.0, -labels.p / r, k1],
        [-labels.q / r, 0.0, k2],
        [0.0, 0.0, 1.0],
    ]
    return RepMatrix(np.array(entries), MatrixKind.HALFWORD, k=(m - 1) // 2, theta=math.pi / m)


def oracle_power(labels: TriangleLabels, k: int, kind: MatrixKind) -> RepMatrix:
    """Same words as the closed forms, built by repeated explicit multiplication."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise GraphStructureError(f"power k must be a nonnegative integer, got {k!r}")
    x1, x2 = generators(labels)
    base = {
        MatrixKind.ROT12: x1.entries @ x2.entries,
        MatrixKind.ROT21: x2.entries @ x1.entries,
        MatrixKind.PREFIX2_ROT12: x1.entries @ x2.entries,
        MatrixKind.PREFIX1_ROT21: x2.entries @ x1.entries,
    }
    if kind is MatrixKind.HALFWORD:
        m = labels.m12()
        power = _pow(x2.entries @ x1.entries, (m - 1) // 2)
        return RepMatrix(x1.entries @ power, kind, k=(m - 1) // 2)
    if kind not in base:
        raise GraphStructureError(f"oracle_power does not build {kind}")
    power = _pow(base[kind], k)
    if kind is MatrixKind.PREFIX2_ROT12:
        power = x2.entries @ power
    elif kind is MatrixKind.PREFIX1_ROT21:
        power = x1.entries @ power
    return RepMatrix(power, kind, k=k)


def _pow(matrix: np.ndarray, k: int) -> np.ndarray:
    out = np.eye(3)
    for _ in range(k):
        out = out @ matrix
    return out


def word_matrix(labels: TriangleLabels, firing_nodes: Iterable) -> np.ndarray:
    """Product of generators in firing order; nodes must be gamma1 or gamma2."""
    x1, x2 = generators(labels)
    out = np.eye(3)
    for node in firing_nodes:
        if node == labels.gamma1:
            out = out @ x1.entries
        elif node == labels.gamma2:
            out = out @ x2.entries
        else:
            raise GraphStructureError(f"word matrices only cover gamma1/gamma2 firings, got {node!r}")
    return out


def pairing_values(position: Sequence[float], matrix: np.ndarray | RepMatrix) -> np.ndarray:
    """Row-pairing of a position against matrix columns: the post-word node values."""
    entries = matrix.entries if isinstance(matrix, RepMatrix) else matrix
    return np.asarray(position, dtype=float) @ entries


def eigencheck(labels: TriangleLabels) -> float:
    """Reassemble the forward rotation from its spectral factors; returns the max residual.

    The factor matrices carry complex entries e^(+-2i*theta) with diagonal
    (e^(2i*theta), e^(-2i*theta), 1); the shared prefactor
    1/(q*(e^(2i*theta)-e^(-2i*theta))) normalizes the inverse factor.  The
    returned residual is the largest |difference| between the rotation and the
    reassembled product (complex magnitude, so stray imaginary parts count).
    """
    p, q, p1, p2 = labels.p, labels.q, labels.p1, labels.p2
    if p * q >= 4.0:
        raise GraphStructureError(f"amplitude product p*q = {p * q!r} must be < 4")
    theta = theta_for(labels)
    w = cmath.exp(2j * theta)
    wi = cmath.exp(-2j * theta)
    u = p2 * p + 2.0 * p1
    v = p1 * q + 2.0 * p2
    s = 4.0 - p * q
    c1 = (-q * u + (wi + 1.0) * v) / s
    c2 = (q * u - (w + 1.0) * v) / s
    c3 = q * (w - wi) / s
    P = np.array([[w + 1.0, wi + 1.0, u], [q, q, v], [0.0, 0.0, s]], dtype=complex)
    D = np.diag([w, wi, 1.0])
    B = np.array([[q, -wi - 1.0, c1], [-q, w + 1.0, c2], [0.0, 0.0, c3]], dtype=complex)
    P_inv = B / (q * (w - wi))
    x1, x2 = generators(labels)
    rotation = x1.entries @ x2.entries
    residual = float(np.max(np.abs(P @ D @ P_inv - rotation)))
    # P_inv must genuinely invert P; fold any defect into the residual.
    inverse_defect = float(np.max(np.abs(P @ P_inv - np.eye(3))))
    return max(residual, inverse_defect)


def rotation_eigenvalues(labels: TriangleLabels) -> np.ndarray:
    """Eigenvalues of the forward rotation, straight from the numeric matrix."""
    x1, x2 = generators(labels)
    return np.linalg.eigvals(x1.entries @ x2.entries)
