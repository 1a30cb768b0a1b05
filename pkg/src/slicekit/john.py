"""Maximum-volume inscribed ellipsoids and the sandwich E ⊂ L ⊂ sqrt(n) E.

For symmetric polytopes {|<a_i, x>| <= b_i} the inscribed ellipsoid
{x : x^T M x <= 1} of maximal volume is the polar of the minimum-volume
ellipsoid enclosing the points ±a_i/b_i. That problem is a D-optimal
design over the weights u_i of those points, solved here by Frank-Wolfe
with away steps (Todd & Yildirim). At the optimum M = n * sum_i u_i c_i c_i^T.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .bodies import (
    Ball,
    Cube,
    Ellipsoid,
    HPolytope,
    LpBall,
    RotatedBody,
    ScaledBody,
    body_volume,
)
from .errors import CapabilityError, ConvergenceError, DataError
from .scalars import log_unit_ball_volume

ANALYTIC_TOL = 1e-6
SOLVER_TOL = 1e-3
VOLUME_TOL = 1e-9


def _dedupe_antipodal(c):
    keep = []
    seen = set()
    for i, row in enumerate(c):
        key = tuple(np.round(row, 12))
        neg = tuple(np.round(-row, 12))
        if key in seen or neg in seen:
            continue
        seen.add(key)
        keep.append(i)
    return c[keep]


def design_weights(points, tol=1e-8, max_iter=100000):
    """D-optimal weights u on the rows of ``points`` (symmetric design).

    Returns (u, gap, iterations) where gap = max_i c_i^T S^{-1} c_i / n - 1.
    """
    c = np.asarray(points, dtype=float)
    m, n = c.shape
    if np.linalg.matrix_rank(c) < n:
        raise DataError("facet normals do not span R^n; the polytope is unbounded")
    u = np.full(m, 1.0 / m)
    gap = math.inf
    for it in range(1, max_iter + 1):
        s = (c * u[:, None]).T @ c
        g = np.einsum("ij,ij->i", c @ np.linalg.inv(s), c)
        j = int(np.argmax(g))
        support = np.flatnonzero(u > 0)
        k = support[int(np.argmin(g[support]))]
        up = g[j] / n - 1.0
        down = 1.0 - g[k] / n
        gap = up
        if max(up, down) <= tol:
            return u, max(gap, 0.0), it
        if up >= down:
            step = (g[j] - n) / (n * (g[j] - 1.0))
            u *= 1.0 - step
            u[j] += step
        else:
            drop = u[k] / (1.0 - u[k])
            # with g_k <= 1 the objective keeps improving until u_k hits 0
            step = drop if g[k] <= 1.0 else min((n - g[k]) / (n * (g[k] - 1.0)), drop)
            u *= 1.0 + step
            u[k] -= step
            u[u < 1e-300] = 0.0
    raise ConvergenceError(f"D-optimal design did not converge in {max_iter} iterations (gap {gap:.3g})", last_iterate=u)


def _solve_polytope(normals, offsets, tol=1e-8, max_iter=100000):
    c = _dedupe_antipodal(np.asarray(normals) / np.asarray(offsets)[:, None])
    n = c.shape[1]
    u, gap, iters = design_weights(c, tol, max_iter)
    m = n * (c * u[:, None]).T @ c
    m = 0.5 * (m + m.T)
    # enforce E ⊂ P exactly: shrink until every facet constraint holds
    kappa = float(np.max(np.einsum("ij,ij->i", c @ np.linalg.inv(m), c)))
    if kappa > 1.0:
        m = kappa * m
    return m, {"method": "solver", "iterations": iters, "gap": gap}


def _gauge_gradients(body, points, h=1e-7):
    n = body.dim
    grads = np.empty_like(points)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        grads[:, j] = (body.gauge(points + e) - body.gauge(points - e)) / (2 * h)
    return grads


def _facet_sampling(body, grid):
    """Circumscribe by tangent halfspaces at grid directions, solve, then shrink into L."""
    theta = grid.nodes[: len(grid) // 2]
    x = body.radial(theta)[:, None] * theta
    a = _gauge_gradients(body, x)
    b = np.einsum("ij,ij->i", a, x)
    # the sampling slack dominates; a looser design gap is enough here
    m, info = _solve_polytope(a, b, tol=1e-6)
    ratio = body.radial(theta) * np.sqrt(np.einsum("ij,jk,ik->i", theta, m, theta))
    shrink = float(min(1.0, np.min(ratio)))
    info.update(method="facet-sampling", shrink=shrink, facets=len(b))
    return m / shrink**2, info


def _analytic(body):
    n = body.dim
    if isinstance(body, Ellipsoid):
        return body.matrix.copy()
    if isinstance(body, Ball):
        return np.eye(n) / body.radius**2
    if isinstance(body, Cube):
        return np.eye(n) / body.halfwidth**2
    if isinstance(body, LpBall) and body.p >= 1.0:
        # the hyperoctahedral symmetry forces a ball; its radius is the inradius
        r = 1.0 if body.p >= 2.0 else n ** (0.5 - 1.0 / body.p)
        return np.eye(n) / r**2
    return None


def inscribed_ellipsoid(body, grid=None, tol=1e-8, max_iter=100000):
    """Maximum-volume origin-symmetric ellipsoid inside a convex body.

    Returns ``(Ellipsoid, info)``; ``info["method"]`` is one of
    "analytic", "solver" or "facet-sampling".
    """
    if not body.convex:
        raise CapabilityError(f"{body.tag} is not a convex body; the John ellipsoid is undefined here")
    m = _analytic(body)
    if m is not None:
        return Ellipsoid(m), {"method": "analytic"}
    if isinstance(body, ScaledBody):
        e, info = inscribed_ellipsoid(body.base, grid, tol, max_iter)
        return Ellipsoid(e.matrix / body.factor**2), info
    if isinstance(body, RotatedBody):
        e, info = inscribed_ellipsoid(body.base, grid, tol, max_iter)
        q = body.rotation
        return Ellipsoid(q @ e.matrix @ q.T), info
    if isinstance(body, HPolytope):
        m, info = _solve_polytope(body.normals, body.offsets, tol, max_iter)
        return Ellipsoid(m), info
    if grid is None:
        from .sphere import sphere_grid

        grid = sphere_grid(body.dim, 16) if body.dim <= 6 else sphere_grid(body.dim, 4096, "monte-carlo")
    m, info = _facet_sampling(body, grid)
    return Ellipsoid(m), info


@dataclass
class SandwichCertificate:
    inner: Ellipsoid
    outer: Ellipsoid
    min_ratio: float
    max_ratio: float
    min_direction: np.ndarray
    max_direction: np.ndarray
    volume_root_ratio: float  # (|K| / |L|)^{1/n}; closed-form |L| when the body has one
    tol: float
    method: str
    info: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.inner.dim

    @property
    def inner_ok(self):
        return self.min_ratio >= 1.0 / math.sqrt(self.dim) - self.tol

    @property
    def outer_ok(self):
        return self.max_ratio <= 1.0 + self.tol

    @property
    def volume_ok(self):
        return self.volume_root_ratio <= math.sqrt(self.dim) + VOLUME_TOL

    @property
    def passed(self):
        return self.inner_ok and self.outer_ok and self.volume_ok

    def diagnostic(self):
        if self.passed:
            return "sandwich certificate holds"
        parts = []
        if not self.inner_ok:
            parts.append(f"(1/sqrt(n))K ⊄ L: ratio {self.min_ratio:.9g} at {self.min_direction.tolist()}")
        if not self.outer_ok:
            parts.append(f"L ⊄ K: ratio {self.max_ratio:.9g} at {self.max_direction.tolist()}")
        if not self.volume_ok:
            parts.append(f"(|K|/|L|)^(1/n) = {self.volume_root_ratio:.12g} exceeds sqrt(n)")
        return "; ".join(parts)

    def to_dict(self):
        return {
            "inner_matrix": self.inner.matrix.reshape(-1).tolist(),
            "outer_matrix": self.outer.matrix.reshape(-1).tolist(),
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "min_direction": self.min_direction.tolist(),
            "max_direction": self.max_direction.tolist(),
            "volume_root_ratio": self.volume_root_ratio,
            "method": self.method,
            "pass": self.passed,
        }


def sandwich(body, check_grid, tol=None):
    """K = sqrt(n) E with E the inscribed ellipsoid; checks (1/sqrt(n))K ⊂ L ⊂ K on ``check_grid``."""
    n = body.dim
    e, info = inscribed_ellipsoid(body, check_grid)
    k = Ellipsoid(e.matrix / n)
    if tol is None:
        tol = ANALYTIC_TOL if info["method"] == "analytic" else SOLVER_TOL
    theta = check_grid.nodes
    ratio = body.radial(theta) / k.radial(theta)
    imin, imax = int(np.argmin(ratio)), int(np.argmax(ratio))
    log_k = k.log_volume()
    log_l = body.exact_log_volume()
    if log_l is None:
        log_l = math.log(body_volume(body, check_grid))
    return SandwichCertificate(
        inner=e,
        outer=k,
        min_ratio=float(ratio[imin]),
        max_ratio=float(ratio[imax]),
        min_direction=theta[imin].copy(),
        max_direction=theta[imax].copy(),
        volume_root_ratio=math.exp((log_k - log_l) / n),
        tol=tol,
        method=info["method"],
        info=info,
    )


def ellipsoid_log_volume(e):
    _, logdet = np.linalg.slogdet(e.matrix)
    return log_unit_ball_volume(e.dim) - 0.5 * logdet
