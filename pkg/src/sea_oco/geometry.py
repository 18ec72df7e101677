"""Exact geometry of the feasible sets.

Euclidean balls and axis-aligned boxes are the only supported domains: both
admit closed-form O(d) projections, so learner updates are exact and regret
measurements are not polluted by inner-solver error. All norms are Euclidean.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, ContractViolationError

__all__ = [
    "FeasibleSet",
    "Ball",
    "Box",
    "reg_argmin",
    "maximize_convex_quadratic",
    "sup_affine_norm_sq",
]


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ConfigurationError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ContractViolationError("vector contains NaN or Inf")
    return v


class FeasibleSet:
    """Closed convex domain with exact projection and linear minimization."""

    dim: int

    def project(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def linear_minimize(self, direction: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        raise NotImplementedError

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def center(self) -> np.ndarray:
        raise NotImplementedError

    def _check_dim(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise ConfigurationError(
                f"dimension mismatch: point has shape {p.shape}, set has dim {self.dim}"
            )
        return p


class Ball(FeasibleSet):
    """Euclidean ball {x : ||x - center|| <= radius}."""

    def __init__(self, center, radius: float):
        self._center = _as_vector(center)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise ConfigurationError(f"ball radius must be positive, got {radius}")
        self.dim = self._center.size

    def __repr__(self) -> str:
        return f"Ball(center={self._center.tolist()}, radius={self.radius})"

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def center(self) -> np.ndarray:
        return self._center

    def project(self, p: np.ndarray) -> np.ndarray:
        p = self._check_dim(p)
        offset = p - self._center
        norm = float(np.sqrt(offset @ offset))
        if norm <= self.radius:
            return p
        return self._center + offset * (self.radius / norm)

    def linear_minimize(self, direction: np.ndarray) -> np.ndarray:
        direction = self._check_dim(direction)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            # tie-break: the center, deterministic and symmetric
            return self._center.copy()
        return self._center - direction * (self.radius / norm)

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        p = self._check_dim(p)
        return float(np.linalg.norm(p - self._center)) <= self.radius + tol

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.standard_normal(self.dim)
        u /= np.linalg.norm(u)
        r = self.radius * rng.random() ** (1.0 / self.dim)
        return self._center + r * u


class Box(FeasibleSet):
    """Axis-aligned box {x : lo <= x <= hi} (coordinate-wise)."""

    def __init__(self, lo, hi):
        self.lo = _as_vector(lo)
        self.hi = _as_vector(hi)
        if self.lo.shape != self.hi.shape:
            raise ConfigurationError("box lo/hi dimension mismatch")
        if not np.all(self.lo < self.hi):
            raise ConfigurationError("box requires lo[i] < hi[i] for all i")
        self.dim = self.lo.size
        self._mid = 0.5 * (self.lo + self.hi)

    def __repr__(self) -> str:
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    @property
    def center(self) -> np.ndarray:
        return self._mid

    def project(self, p: np.ndarray) -> np.ndarray:
        p = self._check_dim(p)
        return np.clip(p, self.lo, self.hi)

    def linear_minimize(self, direction: np.ndarray) -> np.ndarray:
        direction = self._check_dim(direction)
        # sign picks the cheaper face; zero coordinates tie-break to the midpoint
        out = np.where(direction > 0.0, self.lo, np.where(direction < 0.0, self.hi, self._mid))
        return out.astype(float)

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        p = self._check_dim(p)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random(self.dim)


def reg_argmin(theta: np.ndarray, c: float, feasible: FeasibleSet) -> np.ndarray:
    """Exact minimizer over the set of <theta, x> + c * ||x||^2 with c > 0.

    The objective equals c * ||x + theta/(2c)||^2 up to a constant, so the
    constrained minimizer is the projection of -theta/(2c).
    """
    if c <= 0.0:
        raise ContractViolationError(f"regularization weight must be positive, got {c}")
    theta = feasible._check_dim(np.asarray(theta, dtype=float))
    return feasible.project(theta * (-0.5 / c))


# --------------------------------------------------------------------------
# Maximization of convex quadratics over the feasible set. Used to evaluate
# sup-norm gradient bounds and mean-gradient variations when the deviation
# field depends on x.
# --------------------------------------------------------------------------

def maximize_convex_quadratic(
    M: np.ndarray | None,
    q: np.ndarray,
    r: float,
    feasible: FeasibleSet,
    restarts: int = 16,
    tol: float = 1e-8,
    max_iters: int = 200,
) -> float:
    """Maximize x'Mx + 2 q'x + r over the set, with M symmetric PSD.

    Exact closed forms are used when available (M = 0, or an origin-centered
    ball with q = 0); otherwise multi-start ascent that repeatedly jumps to the
    maximizer of the local linearization. Convexity makes each jump monotone,
    so the returned value is certified >= every point visited.
    """
    q = feasible._check_dim(np.asarray(q, dtype=float))
    if M is None or not np.any(M):
        x = feasible.linear_minimize(-q)
        return float(2.0 * q @ x + r)

    M = np.asarray(M, dtype=float)
    if isinstance(feasible, Ball) and not np.any(feasible.center) and not np.any(q):
        top = float(np.linalg.eigvalsh(M)[-1])
        return float(feasible.radius**2 * max(top, 0.0) + r)

    def phi(x: np.ndarray) -> float:
        return float(x @ (M @ x) + 2.0 * q @ x + r)

    rng = np.random.default_rng(0x5EA_0C0)
    starts = [feasible.center]
    eye = np.eye(feasible.dim)
    for i in range(min(feasible.dim, 4)):
        starts.append(feasible.linear_minimize(eye[i]))
        starts.append(feasible.linear_minimize(-eye[i]))
    while len(starts) < restarts + 1 + 2 * min(feasible.dim, 4):
        starts.append(feasible.linear_minimize(rng.standard_normal(feasible.dim)))

    best = -np.inf
    for x in starts:
        val = phi(x)
        best = max(best, val)
        for _ in range(max_iters):
            grad_dir = M @ x + q
            y = feasible.linear_minimize(-grad_dir)
            new_val = phi(y)
            if new_val <= val + tol * max(1.0, abs(val)):
                break
            x, val = y, new_val
        best = max(best, val)
    return best


def sup_affine_norm_sq(
    mat: np.ndarray | None,
    offset: np.ndarray,
    feasible: FeasibleSet,
    restarts: int = 16,
    tol: float = 1e-8,
) -> float:
    """sup over the set of ||mat @ x + offset||^2 (mat = None means zero)."""
    offset = np.asarray(offset, dtype=float)
    if mat is None or not np.any(mat):
        return float(offset @ offset)
    mat = np.asarray(mat, dtype=float)
    M = mat.T @ mat
    q = mat.T @ offset
    r = float(offset @ offset)
    return maximize_convex_quadratic(M, q, r, feasible, restarts=restarts, tol=tol)
