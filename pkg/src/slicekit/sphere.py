"""Quadrature on S^{n-1} and on great subspheres S^{n-1} ∩ xi^⊥.

Two schemes are available:

``product-gauss``
    Tensor rule in hyperspherical angles. Each polar angle gets a
    ``level``-point rule on [0, pi], Gauss-Jacobi on each half so the
    sin^k Jacobian's zero at the pole is built in; the azimuth gets ``2 * level`` composite
    Gauss-Legendre points on [0, 2 pi). Only practical for n <= 6.

``monte-carlo``
    ``level`` standard-normal samples drawn from a Philox (counter-based)
    stream, normalized, and paired with their antipodes. Equal weights.

Both schemes build half a grid and append its negation, so antipodal
symmetry is exact in floating point.
"""

from dataclasses import dataclass
from functools import lru_cache
import math
import os
from pathlib import Path

import numpy as np
from scipy.special import roots_jacobi

from .errors import CapabilityError, DataError, DomainError
from .scalars import sphere_area

PRODUCT_GAUSS = "product-gauss"
MONTE_CARLO = "monte-carlo"
_SCHEME_ALIASES = {
    "product-gauss": PRODUCT_GAUSS,
    "gauss": PRODUCT_GAUSS,
    "monte-carlo": MONTE_CARLO,
    "mc": MONTE_CARLO,
}
MAX_PRODUCT_DIM = 6
MIN_LEVEL = 4
UNIT_TOL = 1e-12


def normalize_scheme(scheme):
    try:
        return _SCHEME_ALIASES[scheme]
    except KeyError:
        raise DomainError(f"unknown quadrature scheme {scheme!r}") from None


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Nodes and positive weights on a (sub)sphere.

    ``nodes`` has shape (N, ambient_dim); ``intrinsic_dim`` is the dimension
    of the sphere itself (n-1 for S^{n-1}, n-2 for a great subsphere).
    """

    ambient_dim: int
    intrinsic_dim: int
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    level: int
    seed: int = 0

    def __len__(self):
        return len(self.weights)

    @property
    def total_weight(self):
        return float(np.sum(self.weights))

    def integrate(self, values):
        """Weighted sum of per-node values (pairwise summation)."""
        values = np.asarray(values, dtype=float)
        return float(np.sum(self.weights * values))

    def integrate_function(self, f):
        return self.integrate(f(self.nodes))

    def metadata(self):
        return {"scheme": self.scheme, "level": self.level, "seed": self.seed}


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _panel_gauss(a, b, panels, total):
    """Composite Gauss-Legendre on [a, b] with ``panels`` equal panels."""
    per = max(1, -(-total // panels))
    t, wt = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(a, b, panels + 1)
    h = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + h[:, None] * t[None, :]).ravel()
    w = (h[:, None] * wt[None, :]).ravel()
    return x, w


def _polar_rule(k, level):
    """Angles phi and weights for int_0^pi g(phi) sin^k(phi) dphi.

    Two panels split at the equator. On [0, pi/2] a Gauss-Jacobi rule
    carries the phi^k zero of the Jacobian at the pole and the smooth
    factor (sin(phi)/phi)^k goes into the weights; [pi/2, pi] mirrors it.
    """
    per = max(1, -(-level // 2))
    s, ws = roots_jacobi(per, 0.0, float(k))
    h = 0.25 * math.pi
    phi = h * (1.0 + s)
    w = ws * h ** (k + 1) * (np.sin(phi) / phi) ** k
    # rescale so constants integrate exactly: int_0^pi sin^k = sqrt(pi) G((k+1)/2) / G(k/2 + 1)
    exact = math.exp(0.5 * math.log(math.pi) + math.lgamma(0.5 * (k + 1)) - math.lgamma(0.5 * k + 1))
    w *= exact / (2.0 * np.sum(w))
    return np.concatenate([phi, math.pi - phi[::-1]]), np.concatenate([w, w[::-1]])


def _product_half(n, level):
    """Half of the product-Gauss grid on S^{n-1}: azimuths in [0, pi).

    Panel edges sit where a coordinate vanishes (polar pi/2, azimuth
    multiples of pi/2) or where two trailing coordinates tie in modulus
    (azimuth pi/4 + k pi/2), so l_p and cross-polytope radial functions
    are smooth inside every panel.
    """
    alpha, w_alpha = _panel_gauss(0.0, math.pi, 4, level)
    # last two coordinates: (cos alpha, sin alpha)
    coords = np.stack([np.cos(alpha), np.sin(alpha)], axis=1)
    weights = w_alpha
    # build from the innermost polar angle outward; exponent k for S^{k+1}
    for k in range(1, n - 1):
        phi, w_t = _polar_rule(k, level)
        sin_phi = np.sin(phi)
        m = len(phi)
        head = np.repeat(np.cos(phi), len(weights))[:, None]
        tail = np.kron(sin_phi[:, None], np.ones((len(weights), 1))) * np.tile(coords, (m, 1))
        coords = np.hstack([head, tail])
        weights = np.kron(w_t, weights)
    return coords, weights


def _gaussian_half(n, count, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((count, n))
    norms = np.linalg.norm(z, axis=1)
    # a zero draw has probability 0 but would poison the grid
    norms[norms == 0.0] = 1.0
    return z / norms[:, None]


@lru_cache(maxsize=64)
def _build_grid(n, level, scheme, seed):
    if n == 1:
        nodes = np.array([[1.0], [-1.0]])
        return SphereGrid(1, 0, _frozen(nodes), _frozen(np.ones(2)), scheme, level, seed)
    if scheme == PRODUCT_GAUSS:
        half, w = _product_half(n, level)
    else:
        half = _gaussian_half(n, level, seed)
        w = np.full(level, sphere_area(n) / (2 * level))
    nodes = np.vstack([half, -half])
    weights = np.concatenate([w, w])
    return SphereGrid(n, n - 1, _frozen(nodes), _frozen(weights), scheme, level, seed)


def sphere_grid(n, level, scheme=PRODUCT_GAUSS, seed=0):
    """Quadrature rule on the unit sphere S^{n-1} in R^n.

    For ``monte-carlo`` the rule has ``2 * level`` nodes; for
    ``product-gauss`` it has ``2 * level**(n-1)`` nodes.
    """
    scheme = normalize_scheme(scheme)
    if int(n) != n or n < 1:
        raise DomainError(f"sphere dimension must be a positive integer, got {n!r}")
    n = int(n)
    if int(level) != level or level < MIN_LEVEL:
        raise DomainError(f"grid level must be an integer >= {MIN_LEVEL}, got {level!r}")
    if scheme == PRODUCT_GAUSS and n > MAX_PRODUCT_DIM:
        raise CapabilityError(
            f"product-gauss grids are limited to n <= {MAX_PRODUCT_DIM} "
            f"(node count grows like level^(n-1)); use scheme='monte-carlo' for n = {n}"
        )
    seed = int(seed) if scheme == MONTE_CARLO else 0
    return _build_grid(n, int(level), scheme, seed)


def as_direction(xi, n=None):
    """Validate a unit vector; returns a float array copy."""
    xi = np.array(xi, dtype=float).reshape(-1)
    if n is not None and xi.shape[0] != n:
        raise DomainError(f"direction has length {xi.shape[0]}, expected {n}")
    norm = np.linalg.norm(xi)
    if norm == 0.0 or abs(norm - 1.0) > UNIT_TOL:
        raise DomainError(f"direction must be a unit vector (norm {norm!r})")
    return xi


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def canonical_sign(xis):
    """Flip rows so that their first nonzero coordinate is positive.

    xi and -xi share a hyperplane; canonicalizing first makes every
    hyperplane quantity bitwise even in xi.
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    nz = xis != 0.0
    first = np.argmax(nz, axis=1)
    lead = xis[np.arange(len(xis)), first]
    sign = np.where(lead < 0.0, -1.0, 1.0)
    return xis * sign[:, None]


@dataclass(frozen=True, eq=False)
class Frame:
    axis: np.ndarray
    basis: np.ndarray  # shape (n, n-1); columns span axis^⊥


def _householder_bases(xis):
    """Orthonormal bases of xi^⊥ for each row, shape (m, n, n-1)."""
    xis = canonical_sign(xis)
    m, n = xis.shape
    v = xis.copy()
    v[:, 0] += 1.0  # first coordinate is >= 0 after canonicalization
    vv = np.einsum("ij,ij->i", v, v)
    # H = I - 2 v v^T / (v^T v); we only need columns 1..n-1
    cols = -2.0 * v[:, :, None] * v[:, None, 1:] / vv[:, None, None]
    cols[:, 1:, :] += np.eye(n - 1)
    return cols


def orthonormal_frame(xi):
    """Householder frame whose basis spans xi^⊥.

    The reflector maps e_1 to -xi' where xi' is xi with its leading
    nonzero coordinate made positive, which avoids cancellation in
    1 - xi_1; xi = e_1 gives the basis e_2, ..., e_n.
    """
    xi = as_direction(xi)
    if xi.shape[0] < 2:
        raise DomainError("frames need ambient dimension >= 2")
    return Frame(axis=xi, basis=_householder_bases(xi[None, :])[0])


def subsphere_base(n, level, scheme=PRODUCT_GAUSS, seed=0):
    """The reference grid on S^{n-2} used for every hyperplane in R^n."""
    if n < 2:
        raise DomainError("subspheres need ambient dimension >= 2")
    if n == 2:
        return _build_grid(1, max(int(level), MIN_LEVEL), normalize_scheme(scheme), 0)
    return sphere_grid(n - 1, level, scheme, seed)


def subsphere_nodes(xis, base):
    """Map a reference S^{n-2} grid into xi^⊥ for each row of ``xis``.

    Returns an array of shape (m, len(base), n).
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    bases = _householder_bases(xis)
    return np.matmul(base.nodes, bases.transpose(0, 2, 1))


def subsphere_grid(xi, level, scheme=PRODUCT_GAUSS, seed=0):
    """Quadrature rule on the great subsphere S^{n-1} ∩ xi^⊥.

    For n = 2 this is the two-point rule {±b} with unit weights.
    """
    xi = as_direction(xi)
    n = xi.shape[0]
    base = subsphere_base(n, level, scheme, seed)
    nodes = subsphere_nodes(xi[None, :], base)[0]
    return SphereGrid(n, n - 2, _frozen(nodes), base.weights, base.scheme, base.level, base.seed)


# -- grid cache files ---------------------------------------------------------

_RECORD_DTYPE = "<f8"


def save_grid(grid, path):
    """One record per node: ambient_dim coordinates then the weight, all <f8."""
    records = np.hstack([grid.nodes, grid.weights[:, None]]).astype(_RECORD_DTYPE)
    Path(path).write_bytes(records.tobytes())


def load_grid(path, n, level, scheme, seed=0):
    raw = np.frombuffer(Path(path).read_bytes(), dtype=_RECORD_DTYPE)
    if raw.size % (n + 1):
        raise DataError(f"{path}: size {raw.size} is not a multiple of record width {n + 1}")
    records = raw.reshape(-1, n + 1).astype(float)
    return SphereGrid(n, n - 1, _frozen(records[:, :n]), _frozen(records[:, n]), normalize_scheme(scheme), level, seed)


def cached_sphere_grid(n, level, scheme=PRODUCT_GAUSS, seed=0, cache_dir=None):
    """``sphere_grid`` backed by files in ``cache_dir`` or $SLICEKIT_CACHE_DIR."""
    cache_dir = cache_dir or os.environ.get("SLICEKIT_CACHE_DIR")
    scheme = normalize_scheme(scheme)
    if not cache_dir:
        return sphere_grid(n, level, scheme, seed)
    path = Path(cache_dir) / f"sphere_n{n}_l{level}_{scheme}_s{seed}.bin"
    if path.exists():
        return load_grid(path, n, level, scheme, seed)
    grid = sphere_grid(n, level, scheme, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_grid(grid, path)
    return grid
