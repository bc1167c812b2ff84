"""Closed-form Plücker correction by Lagrange multipliers.

For an input pair ``(a, b)`` let ``p = a.b`` and ``q = |a|^2 + |b|^2``. The
stationary points of the Lagrangian satisfy ``p*lam^2 - q*lam + p = 0``; the
root of smaller magnitude,

    alpha = 2p / (q + sqrt(q^2 - 4p^2)),

gives the global minimiser

    x = (a - alpha*b) / (1 - alpha^2),   y = (b - alpha*a) / (1 - alpha^2).

Nothing here depends on the dimension, so any ``n >= 2`` is accepted.

Evaluated literally, ``1 - alpha^2`` and ``a - alpha*b`` both cancel as
``a -> +-b``. With ``d = |a - b|`` and ``s = |a + b|`` the same quantities are
``sqrt(q^2 - 4p^2) = d*s``, ``1 - alpha^2 = 4ds/(s + d)^2`` and

    x = (s + d)/4 * (m + n),   y = (s + d)/4 * (n - m),

where ``m, n`` are the unit vectors along ``a - b`` and ``a + b``. This form in
turn cancels in ``n - m`` when one vector is much shorter than the other, which
is exactly where ``alpha`` is small and the literal form is accurate. The
default ``form="stable"`` therefore switches on ``|alpha| > 1/2``;
``form="direct"`` always evaluates literally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateInputError, InvalidInputError, InvariantViolation, PoleError
from .geometry import Branch, CorrectionResult, Method, VecPair, classify, dot, sq_norm

#: ~sqrt(double epsilon); below this relative separation a = +-b is treated as exact.
DEGENERACY_TOL = 2.0 ** -26

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class LmpcIntermediates:
    p: float
    q: float
    disc: float
    lambda1: Optional[float]
    lambda2: float
    scale: float


def lambda_roots(p: float, q: float) -> Tuple[Optional[float], float]:
    """Roots of ``p*lam^2 - q*lam + p = 0`` as ``(lambda1, lambda2)``.

    ``lambda2`` is the small root, evaluated without cancellation. ``lambda1``
    is ``None`` when ``p == 0`` (the equation degenerates to ``-q*lam = 0``).
    """
    if q == 0.0:
        raise DegenerateInputError("q == 0: both vectors are zero")
    if q < 0.0 or q < 2.0 * abs(p) - 8.0 * _EPS * q:
        raise InvariantViolation(f"q = {q!r} < 2|p| = {2 * abs(p)!r}")
    # q^2 - 4p^2 factored so neither square can under- or overflow; rounding can
    # push q - 2|p| marginally below zero when a ~ +-b
    disc = max(q - 2.0 * abs(p), 0.0) * (q + 2.0 * abs(p))
    root = math.sqrt(max(q - 2.0 * abs(p), 0.0)) * math.sqrt(q + 2.0 * abs(p))
    lambda2 = 2.0 * p / (q + root)
    lambda1 = (q + root) / (2.0 * p) if p != 0.0 else None
    return lambda1, lambda2


def lmpc3(a1, a2, a3, b1, b2, b3):
    """Scalar kernel for ``n = 3``, generic inputs only; returns ``(x1, x2, x3, y1, y2, y3)``.

    Same operations in the same order as :func:`correct_lmpc`, so results are
    bit-identical on the generic branch.
    """
    p = a1 * b1 + a2 * b2 + a3 * b3
    q = a1 * a1 + a2 * a2 + a3 * a3 + b1 * b1 + b2 * b2 + b3 * b3
    t = 2 * abs(p)
    mu = 2 * p / (q + math.sqrt(max(q - t, 0.0)) * math.sqrt(q + t))
    u_ = 1 / (1 - mu * mu)
    return (
        (a1 - mu * b1) * u_, (a2 - mu * b2) * u_, (a3 - mu * b3) * u_,
        (b1 - mu * a1) * u_, (b2 - mu * a2) * u_, (b3 - mu * a3) * u_,
    )


FORMS = ("stable", "direct")


def correct_lmpc(
    pair: VecPair, degeneracy_tol: float = DEGENERACY_TOL, form: str = "stable"
) -> CorrectionResult:
    """Project ``(a, b)`` onto the Klein quadric ``x.y = 0``.

    Special cases, checked in this order:

    * ``a == b == 0``: returns zeros.
    * ``a ~ b`` or ``a ~ -b`` (relative to ``degeneracy_tol``): returns
      ``(a, 0)``, one of the infinitely many minimisers.
    * ``a.b == 0`` exactly: the input is returned unchanged.

    Everything else goes through the closed-form formula. ``"direct"``
    evaluates it literally, matches :func:`lmpc3` bit for bit and raises
    :class:`PoleError` when ``alpha`` rounds to +-1. ``"stable"`` does the
    same for ``|alpha| <= 1/2`` and uses the ``d, s`` form above otherwise.
    """
    if not isinstance(pair, VecPair):
        raise InvalidInputError("correct_lmpc expects a VecPair")
    if not degeneracy_tol >= 0:
        raise InvalidInputError("degeneracy_tol must be nonnegative")
    if form not in FORMS:
        raise InvalidInputError(f"form must be one of {FORMS}, got {form!r}")
    branch = classify(pair, degeneracy_tol)
    a, b = pair.a, pair.b
    if branch is Branch.BOTH_ZERO:
        return _result(pair, np.zeros_like(a), np.zeros_like(a), None, branch)
    if branch in (Branch.EQUAL_VECTORS, Branch.OPPOSITE_VECTORS):
        return _result(pair, a.copy(), np.zeros_like(a), None, branch)
    if branch is Branch.ORTHOGONAL_INPUT:
        inter = LmpcIntermediates(0.0, pair.q, pair.q ** 2, None, 0.0, 1.0)
        return _result(pair, a.copy(), b.copy(), 0.0, branch, inter)

    al, bl = a.tolist(), b.tolist()
    p = dot(al, bl)
    q = sq_norm(al, bl)
    t = 2 * abs(p)
    disc = max(q - t, 0.0) * (q + t)
    w = q + math.sqrt(max(q - t, 0.0)) * math.sqrt(q + t)
    mu = 2 * p / w
    if form == "stable" and abs(mu) > 0.5:
        return _stable(pair, al, bl, p, q, disc, branch)
    if mu * mu == 1.0:
        raise PoleError("a and b too close to +-each other for the generic formula; raise degeneracy_tol")
    u_ = 1 / (1 - mu * mu)
    x = np.array([(ai - mu * bi) * u_ for ai, bi in zip(al, bl)])
    y = np.array([(bi - mu * ai) * u_ for ai, bi in zip(al, bl)])
    inter = LmpcIntermediates(p, q, disc, w / (2 * p), mu, u_)
    return _result(pair, x, y, mu, branch, inter)


def _stable(pair, al, bl, p, q, disc, branch):
    m = [x - y for x, y in zip(al, bl)]
    n = [x + y for x, y in zip(al, bl)]
    d = math.hypot(*m)
    s = math.hypot(*n)
    # classify guarantees d, s > 0 here
    c = 0.25 * (s + d)
    md, ns = c / d, c / s
    x = np.array([mi * md + ni * ns for mi, ni in zip(m, n)])
    y = np.array([ni * ns - mi * md for mi, ni in zip(m, n)])
    # (s - d)/(s + d) cancels when p is small; q + d*s never does
    w = q + d * s
    lam = 2.0 * p / w
    lambda1 = w / (2.0 * p)
    scale = (s + d) * (s + d) / (4.0 * d * s)
    inter = LmpcIntermediates(p, q, disc, lambda1, lam, scale)
    return _result(pair, x, y, lam, branch, inter)


def _result(pair, x, y, lam, branch, inter=None):
    x.flags.writeable = False
    y.flags.writeable = False
    al, bl = pair.a.tolist(), pair.b.tolist()
    f = sq_norm([u - v for u, v in zip(al, x.tolist())], [u - v for u, v in zip(bl, y.tolist())])
    return CorrectionResult(
        x=x, y=y, objective=f, lam=lam,
        branch=branch, method=Method.LMPC, intermediates=inter,
    )


def stationary_point(pair: VecPair, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """The KKT candidate ``((a - lam b), (b - lam a)) / (1 - lam^2)`` for a given multiplier."""
    if lam * lam == 1.0:
        raise PoleError("lam = +-1 is a pole of the stationary-point map")
    s = 1.0 / (1.0 - lam * lam)
    return (pair.a - lam * pair.b) * s, (pair.b - lam * pair.a) * s


def g_value(lam: float, p: float, q: float) -> float:
    """Objective along the stationary-point curve: ``(lam/(1-lam^2))^2 (q lam^2 - 4 p lam + q)``."""
    if lam == 1.0 or lam == -1.0:
        raise PoleError("g has poles at lam = +-1")
    if abs(lam) <= 1.0:
        phi = lam / (1.0 - lam * lam)
        return phi * phi * (q * lam * lam - 4.0 * p * lam + q)
    # divide through by lam^4 so the large root does not overflow
    r = 1.0 / lam
    d = r * r - 1.0
    return (q - 4.0 * p * r + q * r * r) / (d * d)
