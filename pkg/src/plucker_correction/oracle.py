"""Independent checks on a correction.

The global-minimum search never touches the Lagrange-multiplier algebra. It
parameterises feasible points by an orthonormal pair ``(s, t)`` and sets
``x = (a.s) s``, ``y = (b.t) t``, the best points on the lines spanned by
``s`` and ``t``. Every such ``(x, y)`` satisfies ``x.y = 0``, so the sampled
minimum can only overestimate the true one.

Random numbers come from an explicitly passed ``numpy.random.Generator``
(PCG64 when built from an integer seed), so a seed fixes the whole sample
sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, InvalidInputError, NotApplicableError, RngError
from .geometry import CorrectionResult, VecPair
from .lmpc import correct_lmpc, g_value, lambda_roots

RngLike = Union[np.random.Generator, int, None]

_MAX_REDRAWS = 100
_PARALLEL_TOL = 1e-8
_CHUNK = 1 << 16
_REFINE_STEPS = 1000  # per 3 dimensions of the search manifold


def make_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class OrthonormalPair:
    s: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64)
        t = np.array(self.t, dtype=np.float64)
        if s.shape != t.shape or s.ndim != 1:
            raise DimensionError("s and t must be vectors of equal length")
        if abs(s @ s - 1) > 1e-12 or abs(t @ t - 1) > 1e-12 or abs(s @ t) > 1e-12:
            raise InvalidInputError("s and t must be orthonormal")
        s.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)

    def projections(self, pair: VecPair):
        """``x = (a.s) s`` and ``y = (b.t) t``."""
        return (pair.a @ self.s) * self.s, (pair.b @ self.t) * self.t

    def distances(self, pair: VecPair):
        """Distances from ``a`` to the line along ``s`` and from ``b`` to the line along ``t``."""
        x, y = self.projections(pair)
        return float(np.linalg.norm(pair.a - x)), float(np.linalg.norm(pair.b - y))


@dataclass(frozen=True)
class OracleReport:
    best_objective: float
    best_pair: OrthonormalPair
    samples: int
    method_objective: float
    gap: float  # method_objective - best_objective; negative means the method won


def _orthonormalize(S, T):
    """Gram-Schmidt on row pairs; returns ``(S, T, ok)`` with ``ok`` False for near-parallel rows."""
    ns = np.linalg.norm(S, axis=1)
    S = S / ns[:, None]
    T = T - np.einsum("ij,ij->i", T, S)[:, None] * S
    nt = np.linalg.norm(T, axis=1)
    ok = nt > _PARALLEL_TOL * np.maximum(ns, 1.0)
    T = T / np.where(ok, nt, 1.0)[:, None]
    return S, T, ok & (ns > 0)


def _sample_frames(rng: np.random.Generator, dim: int, count: int):
    S = rng.standard_normal((count, dim))
    T = rng.standard_normal((count, dim))
    S, T, ok = _orthonormalize(S, T)
    for _ in range(_MAX_REDRAWS):
        bad = np.flatnonzero(~ok)
        if bad.size == 0:
            return S, T
        S2, T2, ok2 = _orthonormalize(rng.standard_normal((bad.size, dim)),
                                      rng.standard_normal((bad.size, dim)))
        S[bad], T[bad], ok[bad] = S2, T2, ok2
    raise RngError(f"could not draw {count} orthonormal pairs in {_MAX_REDRAWS} attempts")


def sample_orthonormal_pair(rng: RngLike, dim: int) -> OrthonormalPair:
    """Random orthonormal 2-frame: two Gaussian vectors, Gram-Schmidt, redraw if nearly parallel."""
    if dim < 2:
        raise DimensionError("need dim >= 2 for an orthonormal pair")
    S, T = _sample_frames(make_rng(rng), dim, 1)
    return OrthonormalPair(S[0], T[0])


def _projected(a, b, S, T):
    xa = (S @ a)[:, None] * S
    yb = (T @ b)[:, None] * T
    return np.sum((a - xa) ** 2, axis=1) + np.sum((b - yb) ** 2, axis=1)


def projected_objective(pair: VecPair, frame: OrthonormalPair) -> float:
    """Objective at ``x = (a.s) s``, ``y = (b.t) t``."""
    if frame.s.size != pair.dim:
        raise DimensionError(f"frame has dim {frame.s.size}, input has dim {pair.dim}")
    return float(_projected(pair.a, pair.b, frame.s[None], frame.t[None])[0])


def _best_of_samples(pair: VecPair, samples: int, rng: np.random.Generator):
    best_val, best_s, best_t = math.inf, None, None
    left = samples
    while left > 0:
        m = min(left, _CHUNK)
        S, T = _sample_frames(rng, pair.dim, m)
        vals = _projected(pair.a, pair.b, S, T)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_s, best_t = float(vals[i]), S[i], T[i]
        left -= m
    return best_val, best_s, best_t


def refine_steps(dim: int) -> int:
    """Default refinement budget: 1000 steps per 3 dimensions of the 2-frame manifold."""
    return max(_REFINE_STEPS, round(_REFINE_STEPS * (2 * dim - 3) / 3))


def _refine(A, B, S, T, vals, rng, steps):
    """Block-coordinate accept/reject search, one independent chain per row.

    Steps cycle through three blocks that each leave ``s.t = 0`` intact:

    0. move ``s`` inside the orthogonal complement of ``t``
    1. move ``t`` inside the orthogonal complement of ``s``
    2. rotate ``(s, t)`` together within their own plane

    Every block has its own step size, growing by 1.5 on success and shrinking
    by 1.5**-0.25 on failure (the one-fifth rule). Separate blocks matter when
    ``|a|`` and ``|b|`` differ by orders of magnitude.
    """
    m, n = A.shape
    sigma = np.full((3, m), 0.1)
    grow, shrink = 1.5, 1.5 ** -0.25
    for k in range(steps):
        block = k % 3
        sig = sigma[block][:, None]
        if block == 2:
            theta = sig * rng.standard_normal((m, 1))
            c, s_ = np.cos(theta), np.sin(theta)
            S2, T2 = c * S + s_ * T, c * T - s_ * S
        else:
            moving, fixed = (S, T) if block == 0 else (T, S)
            w = rng.standard_normal((m, n))
            w -= np.einsum("ij,ij->i", w, fixed)[:, None] * fixed
            moved = moving + sig * w
            S2, T2 = (moved, T) if block == 0 else (S, moved)
        S2, T2, ok = _orthonormalize(S2, T2)
        xa = np.einsum("ij,ij->i", S2, A)[:, None] * S2
        yb = np.einsum("ij,ij->i", T2, B)[:, None] * T2
        new = np.sum((A - xa) ** 2, axis=1) + np.sum((B - yb) ** 2, axis=1)
        better = ok & (new < vals)
        S[better], T[better], vals[better] = S2[better], T2[better], new[better]
        sigma[block] = np.clip(np.where(better, sigma[block] * grow, sigma[block] * shrink),
                               1e-16, 1.0)
    return S, T, vals


def global_min_search_batch(
    pairs: Sequence[VecPair],
    samples: int,
    rng: RngLike = None,
    refine: bool = True,
    method_objectives: Optional[Sequence[float]] = None,
    steps: Optional[int] = None,
) -> List[OracleReport]:
    """:func:`global_min_search` for many inputs of one dimension, refining all chains together."""
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    if not pairs:
        return []
    dims = {p.dim for p in pairs}
    if len(dims) != 1:
        raise DimensionError("all inputs in a batch must share one dimension")
    rng = make_rng(rng)
    if method_objectives is None:
        method_objectives = [correct_lmpc(p).objective for p in pairs]
    best = [_best_of_samples(p, samples, rng) for p in pairs]
    S = np.array([b[1] for b in best])
    T = np.array([b[2] for b in best])
    vals = np.array([b[0] for b in best])
    if refine:
        A = np.array([p.a for p in pairs])
        B = np.array([p.b for p in pairs])
        if steps is None:
            steps = refine_steps(A.shape[1])
        S, T, vals = _refine(A, B, S, T, vals, rng, steps)
    reports = []
    for i, mo in enumerate(method_objectives):
        # re-normalise so the frame passes the strict OrthonormalPair check
        s, t, _ = _orthonormalize(S[i:i + 1], T[i:i + 1])
        reports.append(OracleReport(
            best_objective=float(vals[i]),
            best_pair=OrthonormalPair(s[0], t[0]),
            samples=samples,
            method_objective=float(mo),
            gap=float(mo) - float(vals[i]),
        ))
    return reports


def global_min_search(
    pair: VecPair,
    samples: int,
    rng: RngLike = None,
    refine: bool = True,
    method_objective: Optional[float] = None,
    steps: Optional[int] = None,
) -> OracleReport:
    """Best projected objective over ``samples`` random orthonormal pairs.

    With ``refine`` the best pair is then polished by accept/reject coordinate
    steps: 1000 for ``n = 3``, scaled with the manifold dimension ``2n - 3``
    otherwise (see :func:`refine_steps`). ``gap`` is measured against
    ``method_objective`` (LMPC's objective when omitted).
    """
    mo = None if method_objective is None else [method_objective]
    return global_min_search_batch([pair], samples, rng, refine, mo, steps)[0]


class KktResiduals(NamedTuple):
    r1: float  # |a - x - lam y|
    r2: float  # |b - y - lam x|
    r3: float  # |x.y|


def kkt_residuals(pair: VecPair, result: CorrectionResult) -> KktResiduals:
    if result.lam is None:
        raise NotApplicableError(f"branch {result.branch.value} carries no multiplier")
    lam = result.lam
    x, y = result.x, result.y
    return KktResiduals(
        float(np.linalg.norm(pair.a - x - lam * y)),
        float(np.linalg.norm(pair.b - y - lam * x)),
        abs(float(x @ y)),
    )


class OrderingCheck(NamedTuple):
    g2: float
    g1: float
    q: float
    ok: bool


def check_candidate_ordering(pair: VecPair) -> OrderingCheck:
    """Objective at both stationary points against the value ``q`` at the origin.

    The small root must win: ``g(lambda2) <= g(lambda1) <= q``, up to
    ``1e-12 * q``.
    """
    p, q = pair.p, pair.q
    if p == 0.0:
        raise NotApplicableError("p == 0 leaves a single stationary point")
    lambda1, lambda2 = lambda_roots(p, q)
    g1 = g_value(lambda1, p, q)
    g2 = g_value(lambda2, p, q)
    slack = 1e-12 * q
    return OrderingCheck(g2, g1, q, bool(g2 <= g1 + slack and g1 <= q + slack))


def frobenius_identity_gap(U, A, B) -> float:
    """``|U A - B| - |A - U^T B|`` for ``U`` with orthonormal columns.

    Zero when the columns of ``B`` lie in the span of ``U``, positive otherwise:
    the left norm also counts the part of ``B`` outside that span.
    """
    U = np.asarray(U, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    n, k = U.shape
    if A.shape != (k, k) or B.shape != (n, k):
        raise DimensionError(f"expected A {k}x{k} and B {n}x{k}, got {A.shape}, {B.shape}")
    if n <= k:
        raise DimensionError("U must have more rows than columns")
    if np.max(np.abs(U.T @ U - np.eye(k))) > 1e-10:
        raise InvalidInputError("U does not have orthonormal columns")
    return float(np.linalg.norm(U @ A - B) - np.linalg.norm(A - U.T @ B))
