"""Spherical Radon transform Rf(xi) = int_{S^{n-1} ∩ xi^⊥} f, and the dual
pairings it satisfies."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .measures import section_volumes
from .sphere import PRODUCT_GAUSS, as_direction, subsphere_base, subsphere_nodes

_CHUNK_POINTS = 1 << 21


@dataclass(frozen=True)
class SphereFunction:
    """A function on S^{n-1}, vectorized over rows of an (m, n) array."""

    dim: int
    eval: object
    even: bool = False
    name: str = "f"

    def __call__(self, thetas):
        return np.asarray(self.eval(np.asarray(thetas, dtype=float)), dtype=float)

    def check_even(self, grid, tol=1e-10):
        half = len(grid) // 2
        v = self(grid.nodes)
        dev = float(np.max(np.abs(v[:half] - v[half:])))
        if dev > tol:
            raise DomainError(f"{self.name} is flagged even but f(theta) - f(-theta) reaches {dev:.3g}")


def constant(dim, c=1.0):
    return SphereFunction(dim, lambda th: np.full(th.shape[:-1], c), even=True, name=f"const({c:g})")


def coordinate_square(dim, i):
    return SphereFunction(dim, lambda th: th[..., i] ** 2, even=True, name=f"theta_{i + 1}^2")


def trig_polynomial(dim, terms=4, max_freq=3.0, seed=0):
    """Random even trigonometric polynomial sum_k a_k cos(<omega_k, theta>)."""
    rng = np.random.Generator(np.random.Philox(seed))
    amps = rng.uniform(0.5, 1.5, size=terms)
    freqs = rng.uniform(-max_freq, max_freq, size=(terms, dim))

    def f(th):
        return np.cos(th @ freqs.T) @ amps

    return SphereFunction(dim, f, even=True, name=f"trig(seed={seed})")


def _radon_many(f, xis, base):
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    k = len(base)
    out = np.empty(len(xis))
    step = max(1, _CHUNK_POINTS // k)
    for lo in range(0, len(xis), step):
        nodes = subsphere_nodes(xis[lo : lo + step], base)
        out[lo : lo + step] = f(nodes.reshape(-1, nodes.shape[-1])).reshape(-1, k) @ base.weights
    return out


def radon_transform(f, xis, level=32, scheme=PRODUCT_GAUSS, seed=0):
    """Rf at every row of ``xis`` (vectorized form of :func:`radon`)."""
    return _radon_many(f, xis, subsphere_base(f.dim, level, scheme, seed))


def radon(f, xi, level=32, scheme=PRODUCT_GAUSS, seed=0):
    xi = as_direction(xi, f.dim)
    if f.dim < 2:
        raise DomainError("the spherical Radon transform needs n >= 2")
    return float(radon_transform(f, xi[None, :], level, scheme, seed)[0])


def _check_grid(grid, dim):
    if grid.ambient_dim != dim or grid.intrinsic_dim != dim - 1:
        raise DomainError(f"outer grid must cover S^{dim - 1}")


def selfdual_sides(f, g, grid, level=32):
    """(int Rf g, int f Rg) on ``grid`` with subsphere rules at ``level``."""
    if f.dim != g.dim:
        raise DomainError("functions live on different spheres")
    _check_grid(grid, f.dim)
    base = subsphere_base(f.dim, level, grid.scheme, grid.seed)
    lhs = grid.integrate(_radon_many(f, grid.nodes, base) * g(grid.nodes))
    rhs = grid.integrate(f(grid.nodes) * _radon_many(g, grid.nodes, base))
    return lhs, rhs


def selfdual_residual(f, g, grid, level=32):
    """|int Rf g - int f Rg|."""
    lhs, rhs = selfdual_sides(f, g, grid, level)
    return abs(lhs - rhs)


def ib_pairing_sides(body, f, grid, level=32):
    """Both sides of int rho_{IB(L)} f = int Rf dmu with dmu = rho_L^{n-1}/(n-1) dtheta."""
    n = body.dim
    if f.dim != n:
        raise DomainError("function and body dimensions differ")
    _check_grid(grid, n)
    base = subsphere_base(n, level, grid.scheme, grid.seed)
    rho_ib = section_volumes(body, grid.nodes, base)
    lhs = grid.integrate(rho_ib * f(grid.nodes))
    density = body.radial(grid.nodes) ** (n - 1) / (n - 1)
    rhs = grid.integrate(_radon_many(f, grid.nodes, base) * density)
    return lhs, rhs


def ib_pairing_residual(body, f, grid, level=32):
    lhs, rhs = ib_pairing_sides(body, f, grid, level)
    return abs(lhs - rhs)
