"""SVD-based reference corrections (Bartoli-Sturm).

Stack the input as ``A = [a b]`` (n x 2) with thin SVD ``A = U S V^T`` and put
``Z = S V^T``. The optimal pair lies in ``span(U)`` as ``U h_i d_i`` for an
orthonormal 2-frame ``(h_1, h_2)``. Maximising the retained energy is the
same as minimising ``|T h_1|`` with

    T = [[z12,  z22],
         [z21, -z11]],

so ``h_1`` is the second right singular vector of ``T`` and
``d = diag(H^T Z)``. The result is ``R = U H diag(d)``, ``x = R[:, 0]``, ``y = R[:, 1]``.

Three variants:

* :func:`correct_bs` with the closed-form 2-column SVD (``svd="closed"``)
* :func:`correct_bs` with an iterative one-sided Jacobi SVD (``svd="jacobi"``)
* :func:`correct_bs_lsvd`, fully unrolled scalar code for ``n = 3``
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError, InvalidInputError
from .geometry import CorrectionResult, Method, VecPair, classify, objective
from .lmpc import DEGENERACY_TOL

#: ``s2 <= RANK_TOL * s1`` counts as rank one (a parallel to b).
RANK_TOL = 1e-14

_JACOBI_MAX_SWEEPS = 30
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class BsIntermediates:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    Z: np.ndarray
    T: np.ndarray
    Vhat: np.ndarray


def _norm(v):
    return math.sqrt(sum(c * c for c in v))


def _complement(u):
    """A unit vector orthogonal to unit ``u``."""
    k = min(range(len(u)), key=lambda i: abs(u[i]))
    w = [-u[k] * c for c in u]
    w[k] += 1.0
    n = _norm(w)
    return [c / n for c in w]


def _finish_svd(w1, w2, v1, v2):
    """Norms, ordering, sign pinning and U columns from ``A v_i = w_i``."""
    s1, s2 = _norm(w1), _norm(w2)
    if s1 < s2:
        s1, s2, w1, w2, v1, v2 = s2, s1, w2, w1, v2, v1
    if s1 == 0.0:
        raise DegenerateInputError("A == 0 has no singular vectors")
    # first nonzero entry of each right singular vector is made nonnegative
    if v1[0] < 0 or (v1[0] == 0 and v1[1] < 0):
        v1 = (-v1[0], -v1[1])
        w1 = [-c for c in w1]
    if v2[0] < 0 or (v2[0] == 0 and v2[1] < 0):
        v2 = (-v2[0], -v2[1])
        w2 = [-c for c in w2]
    u1 = [c / s1 for c in w1]
    if s2 > 0.0:
        # A v2 carries ~eps*s1 of cancellation error along u1; strip it so U stays orthonormal
        h = sum(x * y for x, y in zip(u1, w2))
        w2 = [y - h * x for x, y in zip(u1, w2)]
        s2 = _norm(w2)
    u2 = [c / s2 for c in w2] if s2 > 0.0 else _complement(u1)
    V = ((v1[0], v2[0]), (v1[1], v2[1]))
    return u1, u2, s1, s2, V


def _svd2_closed(c1, c2):
    """Closed-form thin SVD of the n x 2 matrix with columns ``c1``, ``c2``.

    ``V`` diagonalises the Gram matrix; its rotation angle has an explicit
    formula. The singular values are then the norms of ``A v_i``, which is more
    accurate for the small one than the square root of the Gram eigenvalue.
    """
    g11 = sum(c * c for c in c1)
    g22 = sum(c * c for c in c2)
    g12 = sum(x * y for x, y in zip(c1, c2))
    if g12 == 0.0:
        c, s = (1.0, 0.0) if g11 >= g22 else (0.0, 1.0)
    else:
        theta = 0.5 * math.atan2(2.0 * g12, g11 - g22)
        c, s = math.cos(theta), math.sin(theta)
    w1 = [c * x + s * y for x, y in zip(c1, c2)]
    w2 = [c * y - s * x for x, y in zip(c1, c2)]
    return _finish_svd(w1, w2, (c, s), (-s, c))


def _svd2_jacobi(c1, c2, max_sweeps=_JACOBI_MAX_SWEEPS):
    """One-sided Jacobi SVD of an n x 2 matrix: rotate columns until orthogonal."""
    c1, c2 = list(c1), list(c2)
    v1, v2 = [1.0, 0.0], [0.0, 1.0]
    for _ in range(max_sweeps):
        alpha = sum(x * x for x in c1)
        beta = sum(y * y for y in c2)
        gamma = sum(x * y for x, y in zip(c1, c2))
        if gamma == 0.0 or abs(gamma) <= _EPS * math.sqrt(alpha * beta):
            break
        zeta = (beta - alpha) / (2.0 * gamma)
        t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
        cs = 1.0 / math.sqrt(1.0 + t * t)
        sn = cs * t
        c1, c2 = ([cs * x - sn * y for x, y in zip(c1, c2)],
                  [sn * x + cs * y for x, y in zip(c1, c2)])
        v1, v2 = ([cs * x - sn * y for x, y in zip(v1, v2)],
                  [sn * x + cs * y for x, y in zip(v1, v2)])
    return _finish_svd(c1, c2, tuple(v1), tuple(v2))


def _scaled(svd):
    """Run ``svd`` on columns rescaled by a power of two so Gram entries neither
    underflow nor overflow; the rescaling is exact."""
    def run(c1, c2):
        m = max(max(map(abs, c1)), max(map(abs, c2)))
        if m == 0.0 or 2.0**-200 < m < 2.0**200:
            return svd(c1, c2)
        e = math.frexp(m)[1]
        u1, u2, s1, s2, V = svd([math.ldexp(c, -e) for c in c1], [math.ldexp(c, -e) for c in c2])
        return u1, u2, math.ldexp(s1, e), math.ldexp(s2, e), V
    run.__name__ = svd.__name__
    return run


_SVDS = {"closed": _scaled(_svd2_closed), "jacobi": _scaled(_svd2_jacobi)}


def svd_thin_n2(A, method: str = "closed"):
    """Thin SVD ``A = U S V^T`` of a finite n x 2 matrix (n >= 2).

    Returns ``(U, S, V)`` with ``U`` n x 2 orthonormal columns, ``S`` 2 x 2
    diagonal with ``s1 >= s2 >= 0`` and ``V`` 2 x 2 orthogonal. Each column of
    ``V`` has its first nonzero entry nonnegative.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] != 2 or A.shape[0] < 2:
        raise DimensionError(f"expected an n x 2 matrix with n >= 2, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("A contains NaN or infinity")
    u1, u2, s1, s2, V = _SVDS[method](A[:, 0].tolist(), A[:, 1].tolist())
    return np.column_stack([u1, u2]), np.diag([s1, s2]), np.array(V)


def _rank_one(al, bl):
    # a parallel to b: keep the longer vector, zero the shorter
    if sum(c * c for c in al) >= sum(c * c for c in bl):
        return list(al), [0.0] * len(al)
    return [0.0] * len(al), list(bl)


def _bs_core(al, bl, svd, keep=False):
    """The BS steps on plain lists. Returns ``(x, y, intermediates-or-None)``."""
    u1, u2, s1, s2, V = svd(al, bl)
    if s2 <= RANK_TOL * s1:
        x, y = _rank_one(al, bl)
        return x, y, None
    z11, z12 = s1 * V[0][0], s1 * V[1][0]
    z21, z22 = s2 * V[0][1], s2 * V[1][1]
    # columns of T = [[z12, z22], [z21, -z11]]
    _, _, _, _, Vt = svd([z12, z21], [z22, -z11])
    hv1, hv2 = Vt[0][1], Vt[1][1]
    d1 = hv1 * z11 + hv2 * z21
    d2 = -hv2 * z12 + hv1 * z22
    x = [(p * hv1 + r * hv2) * d1 for p, r in zip(u1, u2)]
    y = [(r * hv1 - p * hv2) * d2 for p, r in zip(u1, u2)]
    inter = None
    if keep:
        inter = BsIntermediates(
            U=np.column_stack([u1, u2]),
            S=np.diag([s1, s2]),
            V=np.array(V),
            Z=np.array([[z11, z12], [z21, z22]]),
            T=np.array([[z12, z22], [z21, -z11]]),
            Vhat=np.array([[hv1, -hv2], [hv2, hv1]]),
        )
    return x, y, inter


def correct_bs(pair: VecPair, svd: str = "closed") -> CorrectionResult:
    """BS correction of ``pair``; ``svd`` is ``"closed"`` or ``"jacobi"``.

    Rank-one input (``a`` parallel to ``b``) has no second singular vector; the
    exact minimiser there keeps the longer of ``a``, ``b`` and zeroes the other.
    """
    if svd not in _SVDS:
        raise InvalidInputError(f"unknown svd {svd!r}; expected one of {sorted(_SVDS)}")
    if not np.any(pair.a) and not np.any(pair.b):
        raise DegenerateInputError("A = [a b] is zero")
    x, y, inter = _bs_core(pair.a.tolist(), pair.b.tolist(), _SVDS[svd], keep=True)
    method = Method.BS if svd == "closed" else Method.BS_ITER
    return _result(pair, x, y, method, inter)


def _result(pair, x, y, method, inter):
    x = np.array(x)
    y = np.array(y)
    x.flags.writeable = False
    y.flags.writeable = False
    return CorrectionResult(
        x=x, y=y, objective=objective(pair, x, y), lam=None,
        branch=classify(pair, DEGENERACY_TOL), method=method, intermediates=inter,
    )


def bs3(a1, a2, a3, b1, b2, b3):
    """BS kernel for ``n = 3`` with the closed-form SVD; returns a flat 6-tuple."""
    x, y, _ = _bs_core([a1, a2, a3], [b1, b2, b3], _svd2_closed)
    return (*x, *y)


def bs_iter3(a1, a2, a3, b1, b2, b3):
    """BS kernel for ``n = 3`` with the Jacobi SVD."""
    x, y, _ = _bs_core([a1, a2, a3], [b1, b2, b3], _svd2_jacobi)
    return (*x, *y)


def bs_lsvd3(a11, a21, a31, a12, a22, a32):
    """Unrolled BS for ``A = [[a11, a12], [a21, a22], [a31, a32]]``.

    Differences from the usual fully unrolled formulation:

    * ``s2`` comes from ``|a x b|^2 = det(A^T A)`` instead of the eigenvalue
      difference, which cancels badly when ``a`` and ``b`` are nearly parallel.
    * Each 2x2 eigenvector is taken from whichever row of ``(M - st I)`` is
      larger, so orthogonal or isotropic inputs do not divide 0 by 0.
    * The selection between ``st1`` and ``st2`` is applied to ``T^T T``: the
      smaller eigenvalue of ``T`` itself does not give the minimiser.
    """
    g11 = a11 * a11 + a21 * a21 + a31 * a31
    g22 = a12 * a12 + a22 * a22 + a32 * a32
    g12 = a11 * a12 + a21 * a22 + a31 * a32
    c1 = a21 * a32 - a31 * a22
    c2 = a31 * a12 - a11 * a32
    c3 = a11 * a22 - a21 * a12
    half_diff = (g11 - g22) / 2
    r = math.sqrt(half_diff * half_diff + g12 * g12)
    s1sq = (g11 + g22) / 2 + r
    s1 = math.sqrt(s1sq)
    if s1 == 0.0:
        raise DegenerateInputError("A = [a b] is zero")
    s2 = math.sqrt(c1 * c1 + c2 * c2 + c3 * c3) / s1
    if s2 <= RANK_TOL * s1:
        x, y = _rank_one((a11, a21, a31), (a12, a22, a32))
        return (*x, *y)

    # eigenvector of A^T A for s1^2 from the larger row of (A^T A - s1^2 I)
    if g11 <= g22:
        v11, v21 = g12, s1sq - g11
    else:
        v11, v21 = s1sq - g22, g12
    if v11 == 0 and v21 == 0:
        v11, v21 = 0.0, 1.0
    nv = math.hypot(v11, v21)
    v11 = v11 / nv; v21 = v21 / nv
    v12 = v21; v22 = -v11

    u11 = (a12 * v21 + a11 * v11) / s1; u12 = (a12 * v22 + a11 * v12) / s2
    u21 = (a21 * v11 + a22 * v21) / s1; u22 = (a21 * v12 + a22 * v22) / s2
    u31 = (a31 * v11 + a32 * v21) / s1; u32 = (a31 * v12 + a32 * v22) / s2
    z11 = s1 * v11; z12 = s1 * v21
    z21 = s2 * v12; z22 = s2 * v22

    t11 = z12; t12 = z22; t21 = z21; t22 = -z11
    m11 = t11 * t11 + t21 * t21
    m22 = t12 * t12 + t22 * t22
    m12 = t11 * t12 + t21 * t22
    rt = math.sqrt(((m11 - m22) / 2) ** 2 + m12 * m12)
    st1 = (m11 + m22) / 2 - rt
    st2 = (m11 + m22) / 2 + rt
    st = st1 if st1 <= st2 else st2
    if m11 >= m22:
        v1, v2 = -m12, m11 - st
    else:
        v1, v2 = m22 - st, -m12
        if v2 < 0:
            v1, v2 = -v1, -v2
    if v1 == 0 and v2 == 0:
        v1, v2 = 0.0, 1.0
    nv = math.hypot(v1, v2)
    v1 = v1 / nv; v2 = v2 / nv

    h11 = v1; h12 = -v2; h21 = v2; h22 = v1
    d1 = h11 * s1 * v11 + h21 * s2 * v12
    d2 = h12 * s1 * v21 + h22 * s2 * v22
    x1 = (u11 * h11 + u12 * h21) * d1
    y1 = (u11 * h12 + u12 * h22) * d2
    x2 = (u21 * h11 + u22 * h21) * d1
    y2 = (u21 * h12 + u22 * h22) * d2
    x3 = (u31 * h11 + u32 * h21) * d1
    y3 = (u31 * h12 + u32 * h22) * d2
    return x1, x2, x3, y1, y2, y3


def correct_bs_lsvd(pair: VecPair) -> CorrectionResult:
    """Unrolled closed-form BS; only defined for 3-vectors."""
    if pair.dim != 3:
        raise DimensionError(f"BS-LSVD is written for n = 3, got n = {pair.dim}")
    if not pair.a.any() and not pair.b.any():
        raise DegenerateInputError("A = [a b] is zero")
    vals = pair.a.tolist() + pair.b.tolist()
    m = max(map(abs, vals))
    if 2.0**-200 < m < 2.0**200:
        out = bs_lsvd3(*vals)
    else:
        e = math.frexp(m)[1]
        out = [math.ldexp(c, e) for c in bs_lsvd3(*(math.ldexp(c, -e) for c in vals))]
    return _result(pair, list(out[:3]), list(out[3:]), Method.BS_LSVD, None)
