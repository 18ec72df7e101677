"""Parametric loss families and per-round gradient distributions.

Every supported family has an affine gradient field (constant for linear
losses, A x + b for quadratics), so mean gradients, variance bounds and
mean-field variations are available in closed form instead of being
estimated. Noise is uniform on the sphere scaled by sigma: gradients stay
almost-surely bounded and the per-round variance equals sigma^2 exactly at
every point of the domain.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .geometry import FeasibleSet, maximize_convex_quadratic, sup_affine_norm_sq

__all__ = [
    "LinearLoss",
    "QuadraticLoss",
    "DiracDist",
    "SphereNoiseDist",
    "FiniteUniformDist",
    "ShiftedDist",
    "variation",
]


# --------------------------------------------------------------------------
# Loss families f(., xi)
# --------------------------------------------------------------------------

class LinearLoss:
    """f(x) = <g, x>."""

    __slots__ = ("g",)

    def __init__(self, g):
        self.g = np.asarray(g, dtype=float)
        if self.g.ndim != 1 or not np.all(np.isfinite(self.g)):
            raise ConfigurationError("linear loss gradient must be a finite vector")

    @classmethod
    def _unchecked(cls, g: np.ndarray) -> "LinearLoss":
        out = object.__new__(cls)
        out.g = g
        return out

    @property
    def dim(self) -> int:
        return self.g.size

    @property
    def curvature(self) -> np.ndarray | None:
        return None

    @property
    def grad_offset(self) -> np.ndarray:
        return self.g

    def value(self, x: np.ndarray) -> float:
        return float(self.g @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        # constant field; callers must not mutate the returned array
        return self.g

    def sup_grad_norm(self, feasible: FeasibleSet) -> float:
        return float(np.linalg.norm(self.g))

    def __repr__(self) -> str:
        return f"LinearLoss(g={self.g.tolist()})"


class QuadraticLoss:
    """f(x) = 0.5 x'Ax + <b, x> with A symmetric PSD."""

    __slots__ = ("A", "b", "lam_min", "lam_max")

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        d = self.b.size
        if self.A.shape != (d, d):
            raise ConfigurationError(f"curvature matrix shape {self.A.shape} != ({d},{d})")
        if not np.allclose(self.A, self.A.T, atol=1e-12):
            raise ConfigurationError("curvature matrix must be symmetric")
        eigs = np.linalg.eigvalsh(self.A)
        if eigs[0] < -1e-10 * max(1.0, eigs[-1]):
            raise ConfigurationError(f"curvature matrix must be PSD, min eigenvalue {eigs[0]}")
        self.lam_min = float(max(eigs[0], 0.0))
        self.lam_max = float(max(eigs[-1], 0.0))

    @classmethod
    def _shifted_offset(cls, base: "QuadraticLoss", b: np.ndarray) -> "QuadraticLoss":
        # shares the validated curvature; skips the PSD re-check
        out = object.__new__(cls)
        out.A = base.A
        out.b = b
        out.lam_min = base.lam_min
        out.lam_max = base.lam_max
        return out

    @property
    def dim(self) -> int:
        return self.b.size

    @property
    def curvature(self) -> np.ndarray:
        return self.A

    @property
    def grad_offset(self) -> np.ndarray:
        return self.b

    def value(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.A @ x) + self.b @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x + self.b

    def sup_grad_norm(self, feasible: FeasibleSet) -> float:
        return float(np.sqrt(sup_affine_norm_sq(self.A, self.b, feasible)))

    def __repr__(self) -> str:
        return f"QuadraticLoss(lam_max={self.lam_max:.3g}, b={self.b.tolist()})"


def _shift_loss(loss, delta: np.ndarray):
    """Loss whose gradient field is the input's plus a constant vector."""
    if isinstance(loss, LinearLoss):
        return LinearLoss._unchecked(loss.g + delta)
    return QuadraticLoss._shifted_offset(loss, loss.b + delta)


def _same_curvature(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    if a is None and b is None:
        return True
    if a is None or b is None:
        return not np.any(b if a is None else a)
    return a is b or np.array_equal(a, b)


# --------------------------------------------------------------------------
# Per-round distributions D_t
# --------------------------------------------------------------------------

class DiracDist:
    """Point mass on a single loss."""

    __slots__ = ("loss",)

    def __init__(self, loss):
        self.loss = loss

    @property
    def dim(self) -> int:
        return self.loss.dim

    def sample(self, rng: np.random.Generator):
        return self.loss

    def mean_grad(self, x: np.ndarray) -> np.ndarray:
        return self.loss.grad(x)

    def mean_affine(self) -> tuple[np.ndarray | None, np.ndarray]:
        return self.loss.curvature, self.loss.grad_offset

    def variance_bound(self, feasible: FeasibleSet) -> float:
        return 0.0

    def grad_norm_bound(self, feasible: FeasibleSet) -> float:
        return self.loss.sup_grad_norm(feasible)


class SphereNoiseDist:
    """Base loss with sigma * u added to the gradient field, u uniform on the sphere.

    ||sigma * u|| = sigma almost surely, so the variance is exactly sigma^2 at
    every x and the gradient bound of the base family degrades by sigma only.
    """

    __slots__ = ("base", "sigma")

    def __init__(self, base, sigma: float):
        self.base = base
        self.sigma = float(sigma)
        if self.sigma < 0.0:
            raise ConfigurationError("noise scale must be nonnegative")

    @property
    def dim(self) -> int:
        return self.base.dim

    def sample(self, rng: np.random.Generator):
        if self.sigma == 0.0:
            return self.base
        u = rng.standard_normal(self.dim)
        u *= self.sigma / float(np.sqrt(u @ u))
        return _shift_loss(self.base, u)

    def mean_grad(self, x: np.ndarray) -> np.ndarray:
        return self.base.grad(x)

    def mean_affine(self) -> tuple[np.ndarray | None, np.ndarray]:
        return self.base.curvature, self.base.grad_offset

    def variance_bound(self, feasible: FeasibleSet) -> float:
        return self.sigma**2

    def grad_norm_bound(self, feasible: FeasibleSet) -> float:
        return self.base.sup_grad_norm(feasible) + self.sigma


class FiniteUniformDist:
    """Uniform draw over the active members of a fixed loss pool."""

    __slots__ = ("pool", "active", "_mean_curv", "_mean_offset", "_shared_curv")

    def __init__(self, pool, active=None):
        if not pool:
            raise ConfigurationError("finite uniform pool must be nonempty")
        self.pool = list(pool)
        if active is None:
            active = np.arange(len(self.pool))
        self.active = np.asarray(active, dtype=np.int64)
        if self.active.size == 0:
            raise ConfigurationError("active subset must be nonempty")
        d = self.pool[0].dim
        if any(m.dim != d for m in self.pool):
            raise ConfigurationError("pool members must share dimension")
        members = [self.pool[i] for i in self.active]
        self._shared_curv = all(
            _same_curvature(members[0].curvature, m.curvature) for m in members[1:]
        )
        offs = np.stack([m.grad_offset for m in members])
        self._mean_offset = offs.mean(axis=0)
        curvs = [m.curvature for m in members if m.curvature is not None]
        if curvs:
            self._mean_curv = sum(curvs) / self.active.size
        else:
            self._mean_curv = None

    @property
    def dim(self) -> int:
        return self.pool[0].dim

    def sample(self, rng: np.random.Generator):
        return self.pool[self.active[rng.integers(self.active.size)]]

    def mean_grad(self, x: np.ndarray) -> np.ndarray:
        if self._mean_curv is None:
            return self._mean_offset
        return self._mean_curv @ x + self._mean_offset

    def mean_affine(self) -> tuple[np.ndarray | None, np.ndarray]:
        return self._mean_curv, self._mean_offset

    def variance_bound(self, feasible: FeasibleSet) -> float:
        members = [self.pool[i] for i in self.active]
        if self._shared_curv:
            # deviations are offset differences only: x-independent, exact
            offs = np.stack([m.grad_offset for m in members])
            dev = offs - self._mean_offset
            return float(np.mean(np.sum(dev * dev, axis=1)))
        # mixed curvature: maximize the average squared affine deviation
        d = self.dim
        mean_curv = self._mean_curv if self._mean_curv is not None else np.zeros((d, d))
        M = np.zeros((d, d))
        q = np.zeros(d)
        r = 0.0
        w = 1.0 / len(members)
        for m in members:
            dA = (m.curvature if m.curvature is not None else np.zeros((d, d))) - mean_curv
            db = m.grad_offset - self._mean_offset
            M += w * dA.T @ dA
            q += w * dA.T @ db
            r += w * float(db @ db)
        return maximize_convex_quadratic(M, q, r, feasible)

    def grad_norm_bound(self, feasible: FeasibleSet) -> float:
        return max(self.pool[i].sup_grad_norm(feasible) for i in self.active)


class ShiftedDist:
    """Base distribution with a deterministic linear corruption added on top."""

    __slots__ = ("base", "corruption")

    def __init__(self, base, corruption: LinearLoss):
        if not isinstance(corruption, LinearLoss):
            raise ConfigurationError("corruption must be a linear loss")
        if corruption.dim != base.dim:
            raise ConfigurationError("corruption dimension mismatch")
        self.base = base
        self.corruption = corruption

    @property
    def dim(self) -> int:
        return self.base.dim

    def sample(self, rng: np.random.Generator):
        return _shift_loss(self.base.sample(rng), self.corruption.g)

    def mean_grad(self, x: np.ndarray) -> np.ndarray:
        return self.base.mean_grad(x) + self.corruption.g

    def mean_affine(self) -> tuple[np.ndarray | None, np.ndarray]:
        curv, off = self.base.mean_affine()
        return curv, off + self.corruption.g

    def variance_bound(self, feasible: FeasibleSet) -> float:
        # the corruption is deterministic so the variance is the base's
        return self.base.variance_bound(feasible)

    def grad_norm_bound(self, feasible: FeasibleSet) -> float:
        return self.base.grad_norm_bound(feasible) + float(np.linalg.norm(self.corruption.g))


def variation(
    a,
    b,
    feasible: FeasibleSet,
    restarts: int = 16,
    tol: float = 1e-8,
) -> float:
    """Squared sup-norm distance between two mean gradient fields.

    Exact (= ||delta offset||^2) whenever the fields share curvature; otherwise
    the convex quadratic ||dA x + db||^2 is maximized over the set.
    """
    curv_a, off_a = a.mean_affine()
    curv_b, off_b = b.mean_affine()
    if a.dim != b.dim:
        raise ConfigurationError("variation requires matching dimensions")
    db = off_a - off_b
    if _same_curvature(curv_a, curv_b):
        return float(db @ db)
    d = a.dim
    dA = (curv_a if curv_a is not None else np.zeros((d, d))) - (
        curv_b if curv_b is not None else np.zeros((d, d))
    )
    return sup_affine_norm_sq(dA, db, feasible, restarts=restarts, tol=tol)
