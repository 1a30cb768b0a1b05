"""Origin-symmetric star bodies described by their radial functions.

A body is anything that can evaluate rho_K on unit vectors, vectorized
over the rows of an (m, n) array. Convex library bodies also carry a
closed-form gauge (Minkowski functional) used for membership tests and
rejection sampling.
"""

import json
import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from .errors import DataError, DomainError
from .scalars import log_unit_ball_volume
from .sphere import PRODUCT_GAUSS, canonical_sign, normalize, sphere_grid, subsphere_base

SYMMETRY_TOL = 1e-10


def _rows(thetas, n):
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape[-1] != n:
        raise DomainError(f"expected vectors of length {n}, got shape {thetas.shape}")
    return thetas


class StarBody:
    """Base class. Subclasses implement ``_radial`` on an (m, n) array."""

    tag = "star"
    convex = False

    def __init__(self, dim):
        if int(dim) != dim or dim < 2:
            raise DomainError(f"body dimension must be an integer >= 2, got {dim!r}")
        self.dim = int(dim)

    def radial(self, thetas):
        thetas = _rows(thetas, self.dim)
        if thetas.ndim == 1:
            return float(self._radial(thetas[None, :])[0])
        flat = thetas.reshape(-1, self.dim)
        return self._radial(flat).reshape(thetas.shape[:-1])

    def _radial(self, thetas):
        raise NotImplementedError

    def gauge(self, x):
        """Minkowski functional ||x||_K; homogeneous of degree 1."""
        x = _rows(x, self.dim)
        r = np.linalg.norm(x, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        theta = x / np.expand_dims(safe, -1)
        out = np.where(r > 0, r / self.radial(theta), 0.0)
        return float(out) if out.ndim == 0 else out

    def contains(self, x, tol=0.0):
        return self.gauge(x) <= 1.0 + tol

    def bounding_box(self):
        """Per-coordinate half-widths of a box containing the body."""
        grid = sphere_grid(self.dim, 2048, "monte-carlo", seed=7) if self.dim > 3 else sphere_grid(self.dim, 48)
        rmax = float(np.max(self.radial(grid.nodes)))
        return np.full(self.dim, 1.25 * rmax)

    def exact_log_volume(self):
        """ln |K| in closed form, or None when only quadrature is available."""
        return None

    def scaled(self, t):
        return ScaledBody(self, t)

    def rotated(self, q):
        return RotatedBody(self, q)

    def spec(self):
        raise DomainError(f"{type(self).__name__} has no JSON representation")

    def describe(self):
        try:
            return json.dumps(self.spec(), sort_keys=True, separators=(",", ":"))
        except DomainError:
            return self.tag

    def __repr__(self):
        return f"<{type(self).__name__} {self.tag} n={self.dim}>"


class Ball(StarBody):
    tag = "ball"
    convex = True

    def __init__(self, dim, radius=1.0):
        super().__init__(dim)
        if not radius > 0:
            raise DataError(f"ball radius must be positive, got {radius!r}")
        self.radius = float(radius)

    def _radial(self, thetas):
        return np.full(len(thetas), self.radius)

    def gauge(self, x):
        x = _rows(x, self.dim)
        return np.linalg.norm(x, axis=-1) / self.radius

    def bounding_box(self):
        return np.full(self.dim, self.radius)

    def exact_log_volume(self):
        return log_unit_ball_volume(self.dim) + self.dim * math.log(self.radius)

    def spec(self):
        s = {"type": "ball", "dim": self.dim}
        if self.radius != 1.0:
            s["radius"] = self.radius
        return s


class LpBall(StarBody):
    """Unit ball of the l_p norm, p >= 1 convex, 0 < p < 1 merely star-shaped."""

    tag = "lp-ball"

    def __init__(self, dim, p):
        super().__init__(dim)
        if not (p > 0 and math.isfinite(p)):
            raise DataError(f"field 'p' must be a positive finite number, got {p!r}")
        self.p = float(p)
        self.convex = self.p >= 1.0

    def gauge(self, x):
        x = _rows(x, self.dim)
        a = np.abs(x)
        # scale by the max entry so large p does not overflow
        m = np.max(a, axis=-1)
        safe = np.where(m > 0, m, 1.0)
        s = np.sum((a / np.expand_dims(safe, -1)) ** self.p, axis=-1)
        return np.where(m > 0, safe * s ** (1.0 / self.p), 0.0)

    def _radial(self, thetas):
        return 1.0 / self.gauge(thetas)

    def bounding_box(self):
        # |x_i| <= ||x||_p for every p > 0
        return np.ones(self.dim)

    def exact_log_volume(self):
        n, p = self.dim, self.p
        return n * (math.log(2.0) + math.lgamma(1.0 + 1.0 / p)) - math.lgamma(1.0 + n / p)

    def spec(self):
        return {"type": "lp-ball", "dim": self.dim, "p": self.p}


class CrossPolytope(LpBall):
    tag = "cross-polytope"

    def __init__(self, dim):
        super().__init__(dim, 1.0)

    def spec(self):
        return {"type": "cross-polytope", "dim": self.dim}


class Cube(StarBody):
    tag = "cube"
    convex = True

    def __init__(self, dim, halfwidth=1.0):
        super().__init__(dim)
        if not halfwidth > 0:
            raise DataError(f"field 'halfwidth' must be positive, got {halfwidth!r}")
        self.halfwidth = float(halfwidth)

    def gauge(self, x):
        x = _rows(x, self.dim)
        return np.max(np.abs(x), axis=-1) / self.halfwidth

    def _radial(self, thetas):
        return 1.0 / self.gauge(thetas)

    def bounding_box(self):
        return np.full(self.dim, self.halfwidth)

    def exact_log_volume(self):
        return self.dim * math.log(2.0 * self.halfwidth)

    def spec(self):
        return {"type": "cube", "dim": self.dim, "halfwidth": self.halfwidth}


class Ellipsoid(StarBody):
    """{x : x^T M x <= 1} for symmetric positive definite M."""

    tag = "ellipsoid"
    convex = True

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DataError(f"field 'matrix' must be square, got shape {m.shape}")
        super().__init__(m.shape[0])
        if np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise DataError("field 'matrix' must be symmetric")
        m = 0.5 * (m + m.T)
        evals = np.linalg.eigvalsh(m)
        if evals[0] <= 0:
            raise DataError(f"field 'matrix' must be positive definite (min eigenvalue {evals[0]:.3g})")
        self.matrix = m
        self.matrix.flags.writeable = False

    @classmethod
    def from_semi_axes(cls, axes, rotation=None):
        axes = np.asarray(axes, dtype=float)
        m = np.diag(axes**-2.0)
        if rotation is not None:
            q = np.asarray(rotation, dtype=float)
            m = q @ m @ q.T
        return cls(m)

    def gauge(self, x):
        x = _rows(x, self.dim)
        return np.sqrt(np.einsum("...i,ij,...j->...", x, self.matrix, x))

    def _radial(self, thetas):
        return 1.0 / self.gauge(thetas)

    def bounding_box(self):
        return np.sqrt(np.diag(np.linalg.inv(self.matrix)))

    def exact_log_volume(self):
        return self.log_volume()

    def log_volume(self):
        _, logdet = np.linalg.slogdet(self.matrix)
        return log_unit_ball_volume(self.dim) - 0.5 * logdet

    def spec(self):
        return {"type": "ellipsoid", "dim": self.dim, "matrix": self.matrix.reshape(-1).tolist()}


class HPolytope(StarBody):
    """Symmetric polytope {x : <a_i, x> <= b_i}; every facet needs its mirror (-a_i, b_i)."""

    tag = "h-polytope"
    convex = True

    def __init__(self, normals, offsets):
        a = np.array(normals, dtype=float)
        b = np.array(offsets, dtype=float).reshape(-1)
        if a.ndim != 2 or a.shape[0] != b.shape[0]:
            raise DataError("field 'facets': normals and offsets do not line up")
        super().__init__(a.shape[1])
        if np.any(b <= 0):
            raise DataError("field 'facets': offsets must be positive (origin interior)")
        self._check_symmetric(a, b)
        self.normals = a
        self.offsets = b
        self._scaled = a / b[:, None]
        self._box = self._compute_box()

    @staticmethod
    def _check_symmetric(a, b):
        rows = np.hstack([a / b[:, None], np.ones((len(b), 1))])
        mirror = np.hstack([-a / b[:, None], np.ones((len(b), 1))])
        tree = cKDTree(rows)
        dist, _ = tree.query(mirror)
        bad = np.flatnonzero(dist > 1e-9)
        if bad.size:
            raise DataError(f"field 'facets': facet {int(bad[0])} has no mirror facet (-a, b)")

    def _compute_box(self):
        half = np.empty(self.dim)
        for j in range(self.dim):
            c = np.zeros(self.dim)
            c[j] = -1.0
            res = linprog(c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * self.dim, method="highs")
            if res.status == 3:
                raise DataError("field 'facets': polytope is unbounded")
            if res.status != 0:
                raise DataError(f"field 'facets': bounding LP failed ({res.message})")
            half[j] = -res.fun
        return half

    def gauge(self, x):
        x = _rows(x, self.dim)
        return np.max(x @ self._scaled.T, axis=-1)

    def _radial(self, thetas):
        return 1.0 / self.gauge(thetas)

    def bounding_box(self):
        return self._box.copy()

    def spec(self):
        facets = np.hstack([self.normals, self.offsets[:, None]])
        return {"type": "h-polytope", "dim": self.dim, "facets": facets.tolist()}


def random_hpolytope(dim, pairs=None, seed=0):
    """Symmetric polytope with ``pairs`` random facet pairs (bounded by construction)."""
    pairs = pairs or 3 * dim
    rng = np.random.Generator(np.random.Philox(seed))
    while True:
        a = normalize(rng.standard_normal((pairs, dim)))
        b = rng.uniform(0.7, 1.3, size=pairs)
        try:
            return HPolytope(np.vstack([a, -a]), np.concatenate([b, b]))
        except DataError:
            continue


class ScaledBody(StarBody):
    tag = "scaled"

    def __init__(self, base, t):
        super().__init__(base.dim)
        if not t > 0:
            raise DomainError(f"scale factor must be positive, got {t!r}")
        self.base = base
        self.factor = float(t)
        self.convex = base.convex

    def _radial(self, thetas):
        return self.factor * self.base.radial(thetas)

    def gauge(self, x):
        return self.base.gauge(x) / self.factor

    def bounding_box(self):
        return self.factor * self.base.bounding_box()

    def exact_log_volume(self):
        base = self.base.exact_log_volume()
        return None if base is None else base + self.dim * math.log(self.factor)

    def spec(self):
        return {"type": "scaled", "factor": self.factor, "base": self.base.spec()}


class RotatedBody(StarBody):
    """Q K for an orthogonal matrix Q."""

    tag = "rotated"

    def __init__(self, base, q):
        super().__init__(base.dim)
        q = np.array(q, dtype=float)
        if q.shape != (base.dim, base.dim) or np.max(np.abs(q @ q.T - np.eye(base.dim))) > 1e-10:
            raise DomainError("rotation must be an orthogonal matrix of matching size")
        self.base = base
        self.rotation = q
        self.convex = base.convex

    def _radial(self, thetas):
        return self.base.radial(thetas @ self.rotation)

    def gauge(self, x):
        return self.base.gauge(np.asarray(x, dtype=float) @ self.rotation)

    def bounding_box(self):
        # box of the rotated bounding box of the base
        return np.abs(self.rotation) @ self.base.bounding_box()

    def exact_log_volume(self):
        return self.base.exact_log_volume()

    def spec(self):
        return {"type": "rotated", "rotation": self.rotation.reshape(-1).tolist(), "base": self.base.spec()}


class TabulatedBody(StarBody):
    """Radial function interpolated from stored values.

    n = 2: linear in the polar angle. n = 3: bilinear in (polar, azimuth)
    on a regular lattice. n >= 4: average of the k nearest stored nodes.
    """

    tag = "tabulated"

    def __init__(self, dim, interpolator, table):
        super().__init__(dim)
        self._interp = interpolator
        self.table = table

    @classmethod
    def from_body(cls, body, resolution=64):
        n = body.dim
        if n == 2:
            ang = np.linspace(0.0, 2 * math.pi, 4 * resolution + 1)
            vals = body.radial(np.stack([np.cos(ang), np.sin(ang)], axis=1))

            def interp(th):
                a = np.mod(np.arctan2(th[:, 1], th[:, 0]), 2 * math.pi)
                return np.interp(a, ang, vals)

            return cls(n, interp, (ang, vals))
        if n == 3:
            phi = np.linspace(0.0, math.pi, resolution + 1)
            alpha = np.linspace(0.0, 2 * math.pi, 2 * resolution + 1)
            P, A = np.meshgrid(phi, alpha, indexing="ij")
            pts = np.stack([np.cos(P), np.sin(P) * np.cos(A), np.sin(P) * np.sin(A)], axis=-1)
            vals = body.radial(pts.reshape(-1, 3)).reshape(P.shape)
            rgi = RegularGridInterpolator((phi, alpha), vals)

            def interp(th):
                p = np.arccos(np.clip(th[:, 0], -1.0, 1.0))
                a = np.mod(np.arctan2(th[:, 2], th[:, 1]), 2 * math.pi)
                return rgi(np.stack([p, a], axis=1))

            return cls(n, interp, (phi, alpha, vals))
        grid = sphere_grid(n, max(4, resolution), "monte-carlo", seed=11)
        vals = body.radial(grid.nodes)
        tree = cKDTree(grid.nodes)
        k = 2 * n

        def interp(th):
            _, idx = tree.query(th, k=k)
            return np.mean(vals[idx], axis=-1)

        return cls(n, interp, (grid.nodes, vals))

    def _radial(self, thetas):
        return self._interp(thetas)


class IntersectionBody(StarBody):
    """IB(L): rho(xi) = |L ∩ xi^⊥|, by subsphere quadrature; memoized per direction."""

    tag = "intersection-body"

    def __init__(self, source, level=32, scheme=PRODUCT_GAUSS, seed=0):
        super().__init__(source.dim)
        self.source = source
        self.level = int(level)
        self.base = subsphere_base(source.dim, level, scheme, seed)
        self._memo = {}

    def _radial(self, thetas):
        from .measures import section_volumes

        canon = canonical_sign(thetas)
        keys = [row.tobytes() for row in canon]
        missing = [i for i, key in enumerate(keys) if key not in self._memo]
        if missing:
            vals = section_volumes(self.source, canon[missing], base=self.base)
            for i, v in zip(missing, vals):
                self._memo[keys[i]] = float(v)
        return np.array([self._memo[key] for key in keys])

    def tabulate(self, resolution=64):
        return TabulatedBody.from_body(self, resolution)

    def spec(self):
        return {"type": "intersection-body", "level": self.level, "source": self.source.spec()}


def intersection_body_of(body, level=32, scheme=PRODUCT_GAUSS, seed=0):
    return IntersectionBody(body, level, scheme, seed)


def minkowski_functional(body, x):
    return body.gauge(x)


def body_volume(body, grid):
    """|K| = (1/n) ∫_{S^{n-1}} rho_K^n, on a full-sphere grid."""
    if grid.ambient_dim != body.dim or grid.intrinsic_dim != body.dim - 1:
        raise DomainError(f"grid on S^{grid.intrinsic_dim} in R^{grid.ambient_dim} does not match body dimension {body.dim}")
    n = body.dim
    return grid.integrate(body.radial(grid.nodes) ** n) / n


def check_star_body(body, grid):
    """Sample the StarBody invariants on a symmetric grid; raises DataError."""
    rho = body.radial(grid.nodes)
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise DataError(f"{body.tag}: radial function must be positive and finite on the sphere")
    half = len(rho) // 2
    asym = np.max(np.abs(rho[:half] - rho[half:]))
    if asym > SYMMETRY_TOL * max(1.0, float(np.max(rho))):
        raise DataError(f"{body.tag}: radial function is not even (deviation {asym:.3g})")
    return float(np.max(rho) / np.min(rho))


# -- JSON body specifications --------------------------------------------------

_KNOWN_TYPES = ("ball", "lp-ball", "cube", "cross-polytope", "ellipsoid", "h-polytope")


def _field(spec, name, kind=float):
    if name not in spec:
        raise DataError(f"body spec of type {spec.get('type')!r} is missing field {name!r}")
    try:
        return kind(spec[name])
    except (TypeError, ValueError):
        raise DataError(f"field {name!r} has invalid value {spec[name]!r}") from None


def body_from_spec(spec):
    """Build a body from a JSON string or an already-decoded dict."""
    if isinstance(spec, (str, bytes)):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise DataError(f"malformed body JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(spec, dict):
        raise DataError("body spec must be a JSON object")
    kind = spec.get("type")
    if kind == "scaled":
        return ScaledBody(body_from_spec(spec.get("base")), _field(spec, "factor"))
    if kind == "rotated":
        base = body_from_spec(spec.get("base"))
        rot = np.asarray(spec.get("rotation"), dtype=float).reshape(base.dim, base.dim)
        return RotatedBody(base, rot)
    if kind == "intersection-body":
        return IntersectionBody(body_from_spec(spec.get("source")), int(spec.get("level", 32)))
    if kind not in _KNOWN_TYPES:
        raise DataError(f"field 'type': unknown body type {kind!r} (expected one of {', '.join(_KNOWN_TYPES)})")
    dim = _field(spec, "dim", int)
    if dim < 2:
        raise DataError(f"field 'dim' must be >= 2, got {dim}")
    if kind == "ball":
        return Ball(dim, float(spec.get("radius", 1.0)))
    if kind == "lp-ball":
        return LpBall(dim, _field(spec, "p"))
    if kind == "cube":
        return Cube(dim, float(spec.get("halfwidth", 1.0)))
    if kind == "cross-polytope":
        return CrossPolytope(dim)
    if kind == "ellipsoid":
        flat = np.asarray(_field(spec, "matrix", list), dtype=float)
        if flat.size != dim * dim:
            raise DataError(f"field 'matrix' needs {dim * dim} row-major entries, got {flat.size}")
        return Ellipsoid(flat.reshape(dim, dim))
    facets = np.asarray(_field(spec, "facets", list), dtype=float)
    if facets.ndim != 2 or facets.shape[1] != dim + 1:
        raise DataError(f"field 'facets' must be a list of [a_1, ..., a_{dim}, b] rows")
    return HPolytope(facets[:, :dim], facets[:, dim])
