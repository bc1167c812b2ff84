"""Vector types, the Klein residual and the correction objective.

Vectors are stored as read-only 1-D ``float64`` arrays. The hot arithmetic in
the solvers works on plain Python floats, so the helpers here that the solvers
share (``dot``, ``sq_norm``) accumulate left to right in a fixed order; that
keeps results bit-identical between the object API and the scalar kernels used
for timing.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, InvalidInputError

#: Default relative tolerance for :class:`PluckerLine` validation.
KLEIN_TOL = 1e-9


class Branch(str, enum.Enum):
    GENERIC = "Generic"
    ORTHOGONAL_INPUT = "OrthogonalInput"
    EQUAL_VECTORS = "EqualVectors"
    OPPOSITE_VECTORS = "OppositeVectors"
    BOTH_ZERO = "BothZero"


class Method(str, enum.Enum):
    LMPC = "LMPC"
    BS = "BS"
    BS_LSVD = "BS_LSVD"
    BS_ITER = "BS_ITER"


def as_vec(values, name: str = "vector") -> np.ndarray:
    """Validate ``values`` as a finite real vector of length >= 2 and freeze it."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 2:
        raise DimensionError(f"{name} must have at least 2 components, got {arr.size}")
    # plain-Python scan: cheaper than a ufunc reduction at these sizes
    if not all(map(math.isfinite, arr.tolist())):
        raise InvalidInputError(f"{name} contains NaN or infinity")
    arr.flags.writeable = False
    return arr


def dot(u: Sequence[float], v: Sequence[float]) -> float:
    if len(u) != len(v):
        raise DimensionError(f"dimension mismatch: {len(u)} vs {len(v)}")
    acc = u[0] * v[0]
    for i in range(1, len(u)):
        acc += u[i] * v[i]
    return acc


def sq_norm(*vectors: Sequence[float]) -> float:
    """Sum of squares of all components of all ``vectors``, accumulated in order."""
    acc = 0.0
    first = True
    for vec in vectors:
        for c in vec:
            if first:
                acc = c * c
                first = False
            else:
                acc += c * c
    return acc


@dataclass(frozen=True)
class VecPair:
    """Unconstrained input ``(a, b)``; for Plücker data ``a`` is the direction part."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_vec(self.a, "a")
        b = as_vec(self.b, "b")
        if a.size != b.size:
            raise DimensionError(f"a and b differ in dimension: {a.size} vs {b.size}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_flat(cls, values) -> "VecPair":
        """Split a 2n-vector ``(a, b)`` into a pair."""
        flat = np.asarray(values, dtype=np.float64).ravel()
        if flat.size % 2:
            raise DimensionError(f"need an even number of components, got {flat.size}")
        n = flat.size // 2
        return cls(flat[:n], flat[n:])

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def p(self) -> float:
        return dot(self.a.tolist(), self.b.tolist())

    @property
    def q(self) -> float:
        return sq_norm(self.a.tolist(), self.b.tolist())


@dataclass(frozen=True)
class PluckerLine:
    """A 3D line as direction ``u`` and moment ``v`` satisfying the Klein quadric.

    The constraint is checked relative to the magnitudes involved:
    ``|u.v| <= tolerance * (1 + |u| |v|)``.
    """

    direction: np.ndarray
    moment: np.ndarray
    tolerance: float = KLEIN_TOL

    def __post_init__(self):
        u = as_vec(self.direction, "direction")
        v = as_vec(self.moment, "moment")
        if u.size != 3 or v.size != 3:
            raise DimensionError("Plücker direction and moment must both be 3-vectors")
        if not self.tolerance >= 0:
            raise InvalidInputError("tolerance must be nonnegative")
        bound = self.tolerance * (1.0 + np.linalg.norm(u) * np.linalg.norm(v))
        residual = klein_residual(u, v)
        if abs(residual) > bound:
            raise InvalidInputError(
                f"not on the Klein quadric: |u.v| = {abs(residual):.3e} > {bound:.3e}"
            )
        object.__setattr__(self, "direction", u)
        object.__setattr__(self, "moment", v)

    @classmethod
    def from_result(cls, result: "CorrectionResult", tolerance: float = KLEIN_TOL) -> "PluckerLine":
        return cls(result.x, result.y, tolerance)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.direction, self.moment])


@dataclass(frozen=True)
class CorrectionResult:
    """Corrected pair ``(x, y)`` together with how it was obtained.

    ``lam`` is the Lagrange multiplier of the returned stationary point, or
    ``None`` on branches where the stationarity equations do not pin it down.
    """

    x: np.ndarray
    y: np.ndarray
    objective: float
    lam: Optional[float]
    branch: Branch
    method: Method
    intermediates: object = field(default=None, compare=False, repr=False)

    @property
    def klein_residual(self) -> float:
        return klein_residual(self.x, self.y)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


def klein_residual(x, y) -> float:
    """Return ``x.y``, the amount by which ``(x, y)`` misses the Klein quadric."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return dot(x.tolist(), y.tolist())


def objective(pair: VecPair, x, y) -> float:
    """Squared Frobenius distance ``|a - x|^2 + |b - y|^2``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != pair.a.shape or y.shape != pair.b.shape:
        raise DimensionError(
            f"expected vectors of dimension {pair.dim}, got {x.shape} and {y.shape}"
        )
    return sq_norm((pair.a - x).tolist(), (pair.b - y).tolist())


def classify(pair: VecPair, degeneracy_tol: float) -> Branch:
    """Which special case, if any, the input falls into.

    ``a == +-b`` is detected relatively: ``|a -+ b| <= tol * max(|a|, |b|)``.
    Orthogonality is only recognised when ``a.b`` is exactly zero.
    """
    al, bl = pair.a.tolist(), pair.b.tolist()
    na = math.hypot(*al)
    nb = math.hypot(*bl)
    if na == 0.0 and nb == 0.0:
        return Branch.BOTH_ZERO
    scale = degeneracy_tol * max(na, nb)
    if math.dist(al, bl) <= scale:
        return Branch.EQUAL_VECTORS
    if math.dist(al, [-y for y in bl]) <= scale:
        return Branch.OPPOSITE_VECTORS
    if dot(al, bl) == 0.0:
        return Branch.ORTHOGONAL_INPUT
    return Branch.GENERIC
