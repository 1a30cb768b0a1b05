"""Ball volumes, sphere areas and the slicing constant, in log space.

|B_2^n| underflows double precision around n = 450, so everything is
carried as a logarithm and only exponentiated when a caller asks for
an actual area or constant.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

from .errors import DomainError

LOG_PI = math.log(math.pi)


def _check_dim(n, minimum):
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise DomainError(f"dimension must be >= {minimum}, got {n}")
    return n


def log_unit_ball_volume(n):
    """ln |B_2^n| = (n/2) ln(pi) - ln Gamma(1 + n/2)."""
    n = _check_dim(n, 1)
    return 0.5 * n * LOG_PI - math.lgamma(1.0 + 0.5 * n)


def log_sphere_area(n):
    """ln |S^{n-1}|, using |S^{n-1}| = n |B_2^n|."""
    n = _check_dim(n, 1)
    return math.log(n) + log_unit_ball_volume(n)


def sphere_area(n):
    """Surface area of the unit sphere S^{n-1} in R^n.

    ``sphere_area(1) == 2`` (the two points of S^0 under counting measure).
    """
    return math.exp(log_sphere_area(n))


def log_slicing_constant(n):
    """ln c_n with c_n = |B_2^n|^{(n-1)/n} / |B_2^{n-1}|.

    The pi powers cancel exactly, leaving two log-gamma terms:
    ln c_n = lgamma((n+1)/2) - ((n-1)/n) lgamma(1 + n/2).
    """
    n = _check_dim(n, 2)
    return math.lgamma(0.5 * (n + 1)) - (n - 1) / n * math.lgamma(1.0 + 0.5 * n)


def slicing_constant(n):
    return math.exp(log_slicing_constant(n))


@dataclass(frozen=True)
class DimensionConstants:
    n: int
    ln_ball_vol: float
    sphere_area: float
    ln_ball_vol_prev: float
    slicing_const: float

    @property
    def ball_vol(self):
        return math.exp(self.ln_ball_vol)

    @property
    def ball_vol_prev(self):
        return math.exp(self.ln_ball_vol_prev)

    @property
    def subsphere_area(self):
        """|S^{n-2}| = (n-1) |B_2^{n-1}|."""
        return sphere_area(self.n - 1)


@lru_cache(maxsize=None)
def dimension_constants(n):
    n = _check_dim(n, 2)
    return DimensionConstants(
        n=n,
        ln_ball_vol=log_unit_ball_volume(n),
        sphere_area=sphere_area(n),
        ln_ball_vol_prev=log_unit_ball_volume(n - 1),
        slicing_const=slicing_constant(n),
    )


def format_constant(x):
    """Decimal string with 12 significant digits, as used in reports."""
    return f"{x:.12g}"
