"""Measures with even densities on star bodies: bodies, sections, and max sections.

All integrals use polar coordinates. Along each ray the radial integral
int_0^{rho(theta)} r^k f(r theta) dr is done in closed form when the density
provides one, otherwise by Gauss-Legendre, split at the density's known
non-smooth radii (the indicator jumps of a composite density, the support
edge of a bump).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammainc, gammaln, ndtri
from scipy.stats import qmc

from .errors import DataError, DomainError
from .scalars import sphere_area
from .sphere import (
    MAX_PRODUCT_DIM,
    MONTE_CARLO,
    PRODUCT_GAUSS,
    _householder_bases,
    as_direction,
    canonical_sign,
    normalize,
    normalize_scheme,
    subsphere_base,
    subsphere_nodes,
)

DEFAULT_RADIAL_NODES = 64
_CHUNK_POINTS = 1 << 21


# -- densities ------------------------------------------------------------------


class Density:
    """Even density on R^n. Subclasses implement ``__call__`` on (..., n) arrays."""

    smoothness = "smooth"
    dim = None
    signed = False

    def __call__(self, x):
        raise NotImplementedError

    def breaks(self, thetas):
        """Radii (m, k) along each ray where the density is not smooth, or None."""
        return None

    def radial_moment(self, power, rho):
        """Closed form of int_0^rho r^power f(r theta) dr, or None if unavailable."""
        return None

    def profile(self, r):
        """f as a function of |x| for radial densities, None otherwise."""
        return None

    def along_rays(self, thetas, r):
        """f(r_ij theta_i) for radii r of shape (m, k), or None to evaluate pointwise."""
        return self.profile(r)

    def rotated(self, q):
        return RotatedDensity(self, q)

    def __add__(self, other):
        return LinearDensity([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return LinearDensity([(1.0, self), (-1.0, other)])

    def __rmul__(self, c):
        return LinearDensity([(float(c), self)])

    def __radd__(self, c):
        return LinearDensity([(float(c), Uniform()), (1.0, self)])

    def __repr__(self):
        return f"<Density {self.spec()}>"


class Uniform(Density):
    def __call__(self, x):
        return np.ones(np.shape(x)[:-1])

    def profile(self, r):
        return np.ones(np.shape(r))

    def radial_moment(self, power, rho):
        return rho ** (power + 1) / (power + 1)

    def spec(self):
        return "uniform"


class Zero(Density):
    def __call__(self, x):
        return np.zeros(np.shape(x)[:-1])

    def radial_moment(self, power, rho):
        return np.zeros_like(rho)

    def profile(self, r):
        return np.zeros(np.shape(r))

    def spec(self):
        return "zero"


class Gaussian(Density):
    """exp(-|x|^2 / (2 sigma^2)); the default sigma gives exp(-|x|^2)."""

    DEFAULT_SIGMA = math.sqrt(0.5)

    def __init__(self, sigma=DEFAULT_SIGMA):
        if not sigma > 0:
            raise DataError(f"gaussian sigma must be positive, got {sigma!r}")
        self.sigma = float(sigma)

    def __call__(self, x):
        return np.exp(-np.sum(np.square(x), axis=-1) / (2 * self.sigma**2))

    def profile(self, r):
        return np.exp(-np.square(r) / (2 * self.sigma**2))

    def radial_moment(self, power, rho):
        a = 0.5 * (power + 1)
        s2 = 2 * self.sigma**2
        return 0.5 * np.exp(a * math.log(s2) + gammaln(a)) * gammainc(a, rho**2 / s2)

    def spec(self):
        if self.sigma == self.DEFAULT_SIGMA:
            return "gaussian"
        return f"gaussian({self.sigma:g})"


class SquaredNorm(Density):
    def __call__(self, x):
        return np.sum(np.square(x), axis=-1)

    def profile(self, r):
        return np.square(r)

    def radial_moment(self, power, rho):
        return rho ** (power + 3) / (power + 3)

    def spec(self):
        return "sq-norm"


class Bump(Density):
    """C-infinity bump exp(1 - 1/(1 - |x|^2/r^2)) on |x| < r, peak value 1."""

    def __init__(self, radius=1.0):
        if not radius > 0:
            raise DataError(f"bump radius must be positive, got {radius!r}")
        self.radius = float(radius)

    def __call__(self, x):
        return self._of_s2(np.sum(np.square(x), axis=-1) / self.radius**2)

    def profile(self, r):
        return self._of_s2(np.square(r) / self.radius**2)

    def _of_s2(self, s2):
        inside = s2 < 1.0
        out = np.zeros(np.shape(s2))
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return out

    def breaks(self, thetas):
        return np.full((len(thetas), 1), self.radius)

    def spec(self):
        return "bump" if self.radius == 1.0 else f"bump({self.radius:g})"


class LinearDensity(Density):
    """sum_i c_i f_i. Marked ``signed`` when any coefficient is negative."""

    def __init__(self, terms):
        flat = []
        for c, f in terms:
            if isinstance(f, LinearDensity):
                flat.extend((c * c2, f2) for c2, f2 in f.terms)
            else:
                flat.append((float(c), f))
        self.terms = flat
        self.signed = any(c < 0 or f.signed for c, f in flat)
        self.smoothness = "smooth"
        for _, f in flat:
            if f.smoothness == "indicator-composite":
                self.smoothness = f.smoothness
            elif f.smoothness == "continuous" and self.smoothness == "smooth":
                self.smoothness = f.smoothness
        dims = {f.dim for _, f in flat if f.dim is not None}
        self.dim = dims.pop() if dims else None

    def __call__(self, x):
        return sum(c * f(x) for c, f in self.terms)

    def breaks(self, thetas):
        parts = [f.breaks(thetas) for _, f in self.terms]
        parts = [p for p in parts if p is not None]
        return np.hstack(parts) if parts else None

    def profile(self, r):
        total = 0.0
        for c, f in self.terms:
            prof = f.profile(r)
            if prof is None:
                return None
            total = total + c * prof
        return total

    def along_rays(self, thetas, r):
        total = 0.0
        for c, f in self.terms:
            vals = f.along_rays(thetas, r)
            if vals is None:
                return None
            total = total + c * vals
        return total

    def radial_moment(self, power, rho):
        total = 0.0
        for c, f in self.terms:
            mom = f.radial_moment(power, rho)
            if mom is None:
                return None
            total = total + c * mom
        return total

    def spec(self):
        out = []
        for c, f in self.terms:
            out.append(f.spec() if c == 1.0 else f"{c:g}*{f.spec()}")
        return "+".join(out)


class CompositeDensity(Density):
    """chi_K + g chi_L for nested bodies L ⊂ K (the density used with the John sandwich)."""

    smoothness = "indicator-composite"

    def __init__(self, outer, inner, g):
        if outer.dim != inner.dim:
            raise DomainError("composite density bodies must share a dimension")
        self.outer = outer
        self.inner = inner
        self.g = g
        self.dim = outer.dim

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        in_k = self.outer.gauge(x) <= 1.0
        in_l = self.inner.gauge(x) <= 1.0
        return in_k.astype(float) + np.where(in_l, self.g(x), 0.0)

    def along_rays(self, thetas, r):
        # membership on a ray is r <= rho(theta)
        g = self.g.along_rays(thetas, r)
        if g is None:
            g = self.g(r[:, :, None] * thetas[:, None, :])
        in_k = r <= self.outer.radial(thetas)[:, None]
        in_l = r <= self.inner.radial(thetas)[:, None]
        return in_k.astype(float) + np.where(in_l, g, 0.0)

    def breaks(self, thetas):
        cols = [self.outer.radial(thetas)[:, None], self.inner.radial(thetas)[:, None]]
        extra = self.g.breaks(thetas)
        if extra is not None:
            cols.append(extra)
        return np.hstack(cols)

    def spec(self):
        return {
            "type": "composite",
            "outer": self.outer.spec(),
            "inner": self.inner.spec(),
            "g": density_spec(self.g),
        }


class RotatedDensity(Density):
    """x -> f(Q^T x): the push-forward of f under the rotation Q."""

    def __init__(self, base, q):
        self.base = base
        self.rotation = np.asarray(q, dtype=float)
        self.smoothness = base.smoothness
        self.dim = self.rotation.shape[0]
        self.signed = base.signed

    def __call__(self, x):
        return self.base(np.asarray(x, dtype=float) @ self.rotation)

    def breaks(self, thetas):
        return self.base.breaks(np.asarray(thetas) @ self.rotation)

    def radial_moment(self, power, rho):
        # radial moments of the builtins are rotation invariant
        return self.base.radial_moment(power, rho)

    def profile(self, r):
        return self.base.profile(r)

    def along_rays(self, thetas, r):
        return self.base.along_rays(np.asarray(thetas) @ self.rotation, r)

    def spec(self):
        return {"type": "rotated", "rotation": self.rotation.reshape(-1).tolist(), "base": density_spec(self.base)}


class FunctionDensity(Density):
    """Wrap a user function of (..., n) arrays; ``name`` is used in reports."""

    def __init__(self, func, name="custom", smoothness="continuous"):
        self.func = func
        self.name = name
        self.smoothness = smoothness

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def spec(self):
        return self.name


def density_spec(d):
    return d.spec()


def density_from_spec(text):
    """Parse "uniform", "gaussian", "gaussian(s)", "sq-norm", "bump", "bump(r)",
    or a composite JSON object {"type": "composite", "outer", "inner", "g"}."""
    from .bodies import body_from_spec

    if isinstance(text, dict):
        spec = text
    else:
        text = str(text).strip()
        if text.startswith("{"):
            import json

            try:
                spec = json.loads(text)
            except json.JSONDecodeError as exc:
                raise DataError(f"malformed density JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        elif "+" in text or "*" in text or text[:1].isdigit():
            return _linear_density(text)
        else:
            return _named_density(text)
    if spec.get("type") != "composite":
        raise DataError(f"field 'type': unknown density type {spec.get('type')!r}")
    for key in ("outer", "inner"):
        if key not in spec:
            raise DataError(f"composite density is missing field {key!r}")
    g = density_from_spec(spec.get("g", "uniform"))
    return CompositeDensity(body_from_spec(spec["outer"]), body_from_spec(spec["inner"]), g)


def _linear_density(text):
    """"c1*name1+c2*name2+c3"; a bare number c means c * uniform."""
    terms = []
    for part in text.replace(" ", "").split("+"):
        if not part:
            raise DataError(f"malformed density {text!r}")
        *coeffs, name = part.split("*")
        try:
            c = math.prod(float(t) for t in coeffs)
        except ValueError:
            raise DataError(f"density {text!r}: bad coefficient in {part!r}") from None
        try:
            terms.append((c * float(name), Uniform()))
        except ValueError:
            terms.append((c, _named_density(name)))
    return LinearDensity(terms)


def _named_density(text):
    name, arg = text, None
    if "(" in text:
        if not text.endswith(")"):
            raise DataError(f"malformed density {text!r}")
        name, rest = text.split("(", 1)
        try:
            arg = float(rest[:-1])
        except ValueError:
            raise DataError(f"density {name!r}: parameter {rest[:-1]!r} is not a number") from None
    if name == "uniform" and arg is None:
        return Uniform()
    if name == "zero" and arg is None:
        return Zero()
    if name == "sq-norm" and arg is None:
        return SquaredNorm()
    if name == "gaussian":
        return Gaussian() if arg is None else Gaussian(arg)
    if name == "bump":
        return Bump() if arg is None else Bump(arg)
    raise DataError(f"unknown density {text!r} (expected uniform, gaussian(sigma), sq-norm, bump(radius) or composite)")


# -- body measures ----------------------------------------------------------------


@dataclass(frozen=True)
class BodyMeasure:
    body: object
    density: Density

    def __post_init__(self):
        if self.density.dim is not None and self.density.dim != self.body.dim:
            raise DomainError(f"density lives in R^{self.density.dim}, body in R^{self.body.dim}")


@dataclass(frozen=True)
class SectionValue:
    direction: np.ndarray
    value: float


def _check_values(density, pts, vals):
    if density.signed:
        return
    bad = vals < 0
    if np.any(bad):
        i = np.flatnonzero(bad.reshape(-1))[0]
        point = pts.reshape(-1, pts.shape[-1])[i]
        raise DataError(f"density is negative ({vals.reshape(-1)[i]:.3g}) at x = {point.tolist()}")


def ray_integrals(density, thetas, rho, power, radial_nodes=DEFAULT_RADIAL_NODES):
    """int_0^{rho_i} r^power f(r theta_i) dr for each row theta_i."""
    thetas = np.asarray(thetas, dtype=float)
    rho = np.asarray(rho, dtype=float)
    moment = density.radial_moment(power, rho)
    if moment is not None:
        return np.asarray(moment, dtype=float)
    if int(radial_nodes) < 1:
        raise DomainError("radial_nodes must be positive")
    t, wt = np.polynomial.legendre.leggauss(int(radial_nodes))
    s, ws = 0.5 * (t + 1.0), 0.5 * wt
    m = len(rho)
    out = np.zeros(m)
    br = density.breaks(thetas)
    if br is None:
        edges = np.stack([np.zeros(m), rho], axis=1)
    else:
        inner = np.sort(np.clip(br, 0.0, rho[:, None]), axis=1)
        edges = np.hstack([np.zeros((m, 1)), inner, rho[:, None]])
    step = max(1, _CHUNK_POINTS // (len(s) * max(1, edges.shape[1] - 1)))
    for lo in range(0, m, step):
        sl = slice(lo, lo + step)
        th = thetas[sl]
        for j in range(edges.shape[1] - 1):
            a, b = edges[sl, j], edges[sl, j + 1]
            length = b - a
            if not np.any(length > 0):
                continue
            r = a[:, None] + length[:, None] * s[None, :]
            vals = density.along_rays(th, r)
            if vals is None:
                vals = density(r[:, :, None] * th[:, None, :])
            if not density.signed and np.any(vals < 0):
                _check_values(density, r[:, :, None] * th[:, None, :], vals)
            out[sl] += length * ((r**power * vals) @ ws)
    return out


def body_measure(m, grid, radial_nodes=DEFAULT_RADIAL_NODES):
    """mu(K) = int_{S^{n-1}} int_0^{rho_K} r^{n-1} f(r theta) dr dtheta."""
    n = m.body.dim
    if grid.ambient_dim != n or grid.intrinsic_dim != n - 1:
        raise DomainError(f"grid on S^{grid.intrinsic_dim} in R^{grid.ambient_dim} does not match body dimension {n}")
    rho = m.body.radial(grid.nodes)
    return grid.integrate(ray_integrals(m.density, grid.nodes, rho, n - 1, radial_nodes))


def body_measure_stderr(m, grid, radial_nodes=DEFAULT_RADIAL_NODES):
    """(estimate, standard error); the error is 0 for deterministic grids."""
    n = m.body.dim
    rho = m.body.radial(grid.nodes)
    vals = ray_integrals(m.density, grid.nodes, rho, n - 1, radial_nodes)
    est = grid.integrate(vals)
    if grid.scheme != MONTE_CARLO:
        return est, 0.0
    half = len(vals) // 2
    pair = 0.5 * (vals[:half] + vals[half:])
    return est, float(sphere_area(n) * np.std(pair, ddof=1) / math.sqrt(half))


def _chunks(count, per_item):
    step = max(1, _CHUNK_POINTS // max(1, per_item))
    for lo in range(0, count, step):
        yield slice(lo, lo + step)


def section_volumes(body, xis, base):
    """|K ∩ xi^⊥| for each row of ``xis``, using the reference S^{n-2} grid ``base``."""
    n = body.dim
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    out = np.empty(len(xis))
    for sl in _chunks(len(xis), len(base)):
        nodes = subsphere_nodes(xis[sl], base)
        rho = body.radial(nodes)
        out[sl] = (rho ** (n - 1)) @ base.weights / (n - 1)
    return out


def section_measures(m, xis, base, radial_nodes=DEFAULT_RADIAL_NODES):
    """mu(K ∩ xi^⊥) for each row of ``xis``."""
    n = m.body.dim
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    k = len(base)
    out = np.empty(len(xis))
    for sl in _chunks(len(xis), k * 4):
        nodes = subsphere_nodes(xis[sl], base).reshape(-1, n)
        rho = m.body.radial(nodes)
        vals = ray_integrals(m.density, nodes, rho, n - 2, radial_nodes)
        out[sl] = vals.reshape(-1, k) @ base.weights
    return out


def _base_for(n, level, scheme, seed):
    scheme = normalize_scheme(scheme)
    if scheme == PRODUCT_GAUSS and n - 1 > MAX_PRODUCT_DIM:
        scheme = MONTE_CARLO
    return subsphere_base(n, level, scheme, seed)


def section_volume(body, xi, level=32, scheme=PRODUCT_GAUSS, seed=0):
    """|K ∩ xi^⊥| = (1/(n-1)) int_{S^{n-1} ∩ xi^⊥} rho_K^{n-1}."""
    xi = as_direction(xi, body.dim)
    return float(section_volumes(body, xi[None, :], subsphere_base(body.dim, level, scheme, seed))[0])


def section_measure(m, xi, level=32, radial_nodes=DEFAULT_RADIAL_NODES, scheme=PRODUCT_GAUSS, seed=0):
    xi = as_direction(xi, m.body.dim)
    base = subsphere_base(m.body.dim, level, scheme, seed)
    return SectionValue(xi, float(section_measures(m, xi[None, :], base, radial_nodes)[0]))


# -- maximization over directions ----------------------------------------------------


def direction_net(n, size=4096, seed=0):
    """Antipodally deduplicated candidate directions.

    Contains the coordinate axes, every {-1, 0, 1} sign pattern for n <= 6
    (only the full diagonals beyond that), and ``size`` scrambled-Sobol
    points pushed to the sphere through the normal quantile function.
    """
    pats = []
    if n <= 6:
        grids = np.array(np.meshgrid(*[[-1.0, 0.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
        pats.append(grids[np.any(grids != 0, axis=1)])
    else:
        pats.append(np.eye(n))
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
        pats.append(signs)
    if size:
        sob = qmc.Sobol(d=n, scramble=True, seed=np.random.Generator(np.random.Philox(seed)))
        u = sob.random_base2(int(math.ceil(math.log2(size))))
        u = np.clip(u, 1e-12, 1 - 1e-12)
        pats.append(ndtri(u))
    net = canonical_sign(normalize(np.vstack(pats)))
    _, idx = np.unique(np.round(net, 12), axis=0, return_index=True)
    return net[np.sort(idx)]


def _argbest(dirs, vals):
    """Index of the largest value; exact ties go to the lexicographically smallest direction."""
    keys = [dirs[:, j] for j in range(dirs.shape[1] - 1, -1, -1)] + [-vals]
    return int(np.lexsort(keys)[0])


def max_section(
    m,
    coarse_level=6,
    polish_iters=40,
    level=32,
    radial_nodes=DEFAULT_RADIAL_NODES,
    scheme=PRODUCT_GAUSS,
    seed=0,
    net_size=None,
    candidates=4,
):
    """Approximate max over xi of mu(K ∩ xi^⊥).

    The net is scored at ``coarse_level``; the best ``candidates`` are
    re-scored at ``level`` and the winner is refined by a pattern search
    along its frame's tangent directions, halving the step on failure.
    """
    n = m.body.dim
    if net_size is None:
        net_size = 4096 if n <= 6 else 1024
    coarse = _base_for(n, coarse_level, scheme, seed)
    fine = _base_for(n, level, scheme, seed)
    coarse_nodes = min(radial_nodes, 16)

    net = direction_net(n, net_size, seed)
    scores = section_measures(m, net, coarse, coarse_nodes)
    top = np.argsort(-scores, kind="stable")[:candidates]
    dirs = net[top]
    vals = section_measures(m, dirs, fine, radial_nodes)
    best = _argbest(dirs, vals)
    xi, val = dirs[best], vals[best]
    if n == 2:
        h = math.pi / (2 * len(net))
    else:
        h = min(0.2, 2.0 * (sphere_area(n) / len(net)) ** (1.0 / (n - 1)))
    for _ in range(polish_iters):
        if h < 1e-11:
            break
        basis = _householder_bases(xi[None, :])[0].T
        trial = canonical_sign(normalize(np.vstack([xi + h * basis, xi - h * basis])))
        tv = section_measures(m, trial, fine, radial_nodes)
        j = _argbest(trial, tv)
        if tv[j] > val:
            xi, val = trial[j], tv[j]
        else:
            h *= 0.5
    return SectionValue(xi, float(val))
