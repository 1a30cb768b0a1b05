"""Verifiers for the slicing inequalities and the stability estimate.

Every verifier returns a report carrying both sides, the slack
(rhs - lhs), the maximizing direction, and enough metadata to replay
the run. The maximal section is computed once per (body, density,
resolution) and may be passed between verifiers so that related
bounds share it exactly.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .bodies import (
    Ball,
    StarBody,
    Cube,
    Ellipsoid,
    HPolytope,
    IntersectionBody,
    LpBall,
    RotatedBody,
    ScaledBody,
    body_volume,
    intersection_body_of,
)
from .errors import CapabilityError, DataError, DomainError
from .john import sandwich
from .measures import (
    DEFAULT_RADIAL_NODES,
    BodyMeasure,
    CompositeDensity,
    FunctionDensity,
    Uniform,
    body_measure_stderr,
    max_section,
    ray_integrals,
    section_measure,
    section_volume,
)
from .scalars import dimension_constants, sphere_area
from .sphere import MONTE_CARLO, PRODUCT_GAUSS, as_direction, normalize_scheme, orthonormal_frame, sphere_grid

EQ1 = "eq1-sqrtn"
EQ2 = "eq2-ib-volume"
EQ3 = "eq3-ib-measure"
EQ4 = "eq4-thm1"
INEQUALITY_IDS = (EQ1, EQ2, EQ3, EQ4)

SMOOTH_TOL = 1e-6
ROUGH_TOL = 1e-4

# per-dimension product-Gauss plans: (level, section_level, coarse_level)
_GAUSS_PLANS = {2: (64, 4, 4), 3: (32, 32, 8), 4: (24, 16, 6), 5: (14, 10, 4), 6: (10, 8, 4)}


@dataclass(frozen=True)
class GridConfig:
    """Resolution plan for one verifier run.

    ``level`` drives the full-sphere grid, ``section_level`` the subsphere
    grids used for sections and intersection bodies, ``coarse_level`` the
    subsphere grids that score the direction net in the max-section search.
    For monte-carlo, levels count antipodal sample pairs.
    """

    scheme: str = PRODUCT_GAUSS
    level: int = 32
    section_level: int = 32
    coarse_level: int = 8
    radial_nodes: int = DEFAULT_RADIAL_NODES
    polish_iters: int = 40
    seed: int = 0
    net_size: int = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", normalize_scheme(self.scheme))

    @classmethod
    def for_dim(cls, n, scheme=None, **overrides):
        """Default plan: product-Gauss up to n = 6, monte-carlo beyond."""
        if scheme is None:
            scheme = PRODUCT_GAUSS if n <= 6 else MONTE_CARLO
        scheme = normalize_scheme(scheme)
        if scheme == PRODUCT_GAUSS:
            if n not in _GAUSS_PLANS:
                raise CapabilityError(f"no product-gauss plan for n = {n}; use monte-carlo")
            level, sec, coarse = _GAUSS_PLANS[n]
            cfg = cls(PRODUCT_GAUSS, level, sec, coarse)
        else:
            cfg = cls(MONTE_CARLO, 20000, 1500, 150, radial_nodes=32, polish_iters=30, net_size=1024)
        return replace(cfg, **overrides)

    def doubled(self):
        return replace(self, level=2 * self.level, section_level=2 * self.section_level)

    def sphere(self, n):
        return sphere_grid(n, self.level, self.scheme, self.seed)

    def metadata(self):
        return {"scheme": self.scheme, "level": self.level, "section_level": self.section_level, "seed": self.seed}


def is_kinked(body):
    """Bodies whose radial function has kinks (polytopes, l_p with p < 2)."""
    if isinstance(body, (ScaledBody, RotatedBody)):
        return is_kinked(body.base)
    if isinstance(body, IntersectionBody):
        return is_kinked(body.source)
    if isinstance(body, (Cube, HPolytope)):
        return True
    if isinstance(body, LpBall):
        return body.p < 2.0
    return False


def numerical_tolerance(rhs, body, cfg, density=None):
    rough = cfg.scheme == MONTE_CARLO or is_kinked(body)
    if density is not None and density.smoothness == "indicator-composite":
        rough = True
    return (ROUGH_TOL if rough else SMOOTH_TOL) * (1.0 + abs(rhs))


def is_known_intersection_body(body):
    if body.dim == 2:
        return True
    if isinstance(body, (ScaledBody, RotatedBody)):
        return is_known_intersection_body(body.base)
    if isinstance(body, (Ball, Ellipsoid, IntersectionBody)):
        return True
    # every origin-symmetric convex body in R^3 and R^4 is an intersection body
    return body.convex and body.dim <= 4


# -- reports ------------------------------------------------------------------------


def _f(x):
    return None if x is None else float(x)


@dataclass
class InequalityReport:
    inequality_id: str
    n: int
    body: str
    density: str
    lhs: float
    rhs: float
    witness: np.ndarray
    grid: dict
    num_tol: float
    stderr: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def ratio(self):
        if self.rhs == 0.0:
            return 1.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs

    @property
    def passed(self):
        return self.slack >= -(self.num_tol + 3.0 * self.stderr)

    @property
    def equality(self):
        return abs(self.slack) <= self.num_tol

    def to_dict(self):
        return {
            "inequalityId": self.inequality_id,
            "n": self.n,
            "body": self.body,
            "density": self.density,
            "lhs": _f(self.lhs),
            "rhs": _f(self.rhs),
            "slack": _f(self.slack),
            "ratio": _f(self.ratio),
            "witness": [float(v) for v in self.witness],
            "grid": self.grid,
            "numTol": _f(self.num_tol),
            "stderr": _f(self.stderr),
            "details": self.details,
            "pass": self.passed,
        }

    def csv_row(self):
        return [self.inequality_id, self.n, self.body, self.density, _fmt(self.lhs), _fmt(self.rhs), _fmt(self.slack), _fmt(self.ratio), "true" if self.passed else "false"]


CSV_COLUMNS = ["id", "n", "body", "density", "lhs", "rhs", "slack", "ratio", "pass"]


def _fmt(x):
    return f"{float(x):.12g}"


@dataclass
class StabilityReport:
    n: int
    body: str
    density: str
    epsilon: float
    lhs: float
    rhs: float
    chain: dict
    witness: np.ndarray
    grid: dict
    num_tol: float
    details: dict = field(default_factory=dict)

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def slacks(self):
        return {"stability": self.slack, "integrated": self.chain["integrated"], "lowerBound": self.chain["lowerBound"], "holder": self.chain["holder"]}

    @property
    def hypothesis_holds(self):
        return self.epsilon > 0

    @property
    def passed(self):
        return all(v >= -self.num_tol for v in self.slacks.values())

    def to_dict(self):
        return {
            "inequalityId": "stability",
            "n": self.n,
            "body": self.body,
            "density": self.density,
            "epsilon": _f(self.epsilon),
            "lhs": _f(self.lhs),
            "rhs": _f(self.rhs),
            "slack": _f(self.slack),
            "ratio": _f(self.lhs / self.rhs) if self.rhs else None,
            "witness": [float(v) for v in self.witness],
            "grid": self.grid,
            "chain": {k: _f(v) for k, v in self.slacks.items()},
            "hypothesisEpsilonPositive": self.hypothesis_holds,
            "numTol": _f(self.num_tol),
            "details": self.details,
            "pass": self.passed,
        }

    def csv_row(self):
        ratio = self.lhs / self.rhs if self.rhs else 1.0
        return ["stability", self.n, self.body, self.density, _fmt(self.lhs), _fmt(self.rhs), _fmt(self.slack), _fmt(ratio), "true" if self.passed else "false"]


# -- shared pieces --------------------------------------------------------------------


def _density_name(density):
    spec = density.spec()
    if isinstance(spec, dict):
        import json

        return json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return spec


def find_max_section(body, density, cfg):
    """max_xi mu(K ∩ xi^⊥) for the given plan (a SectionValue)."""
    return max_section(
        BodyMeasure(body, density),
        coarse_level=cfg.coarse_level,
        polish_iters=cfg.polish_iters,
        level=cfg.section_level,
        radial_nodes=cfg.radial_nodes,
        scheme=cfg.scheme,
        seed=cfg.seed,
        net_size=cfg.net_size,
    )


def _volume(body, cfg):
    grid = cfg.sphere(body.dim)
    vol, err = body_measure_stderr(BodyMeasure(body, Uniform()), grid)
    return vol, err


def _volume_details(body, vol):
    """Volume diagnostics; includes the quadrature error when |K| has a closed form."""
    out = {"volume": vol}
    exact = body.exact_log_volume()
    if exact is not None:
        out["volumeRelError"] = vol / math.exp(exact) - 1.0
    return out


def _require_ib(body):
    if not is_known_intersection_body(body):
        raise CapabilityError(
            f"{body.tag} in R^{body.dim} is not known to be an intersection body; "
            "use a ball, an ellipsoid, an intersection_body_of(...) body, or a convex body with n <= 4"
        )


# -- verifiers ------------------------------------------------------------------------


def verify_eq1(body, cfg=None, max_sec=None):
    """|K|^{(n-1)/n} <= C max_xi |K ∩ xi^⊥| with C = sqrt(n) (n/(n-1)) c_n."""
    n = body.dim
    cfg = cfg or GridConfig.for_dim(n)
    const = dimension_constants(n)
    max_sec = max_sec or find_max_section(body, Uniform(), cfg)
    vol, err = _volume(body, cfg)
    c = math.sqrt(n) * n / (n - 1) * const.slicing_const
    lhs = vol ** ((n - 1) / n)
    rhs = c * max_sec.value
    return InequalityReport(
        EQ1, n, body.describe(), "uniform", lhs, rhs, max_sec.direction, cfg.metadata(),
        numerical_tolerance(rhs, body, cfg), stderr=(n - 1) / n * lhs / vol * err,
        details={**_volume_details(body, vol), "maxSection": max_sec.value, "constant": c},
    )


def verify_eq2(body, cfg=None, max_sec=None):
    """|K|^{(n-1)/n} <= c_n max_xi |K ∩ xi^⊥| for intersection bodies."""
    _require_ib(body)
    n = body.dim
    cfg = cfg or GridConfig.for_dim(n)
    const = dimension_constants(n)
    max_sec = max_sec or find_max_section(body, Uniform(), cfg)
    vol, err = _volume(body, cfg)
    lhs = vol ** ((n - 1) / n)
    rhs = const.slicing_const * max_sec.value
    rep = InequalityReport(
        EQ2, n, body.describe(), "uniform", lhs, rhs, max_sec.direction, cfg.metadata(),
        numerical_tolerance(rhs, body, cfg), stderr=(n - 1) / n * lhs / vol * err,
        details={**_volume_details(body, vol), "maxSection": max_sec.value, "slicingConstant": const.slicing_const},
    )
    rep.details["equality"] = rep.equality
    return rep


def verify_eq3(body, density, cfg=None, max_sec=None):
    """mu(K) <= (n/(n-1)) c_n max_xi mu(K ∩ xi^⊥) |K|^{1/n} for intersection bodies."""
    _require_ib(body)
    n = body.dim
    cfg = cfg or GridConfig.for_dim(n)
    const = dimension_constants(n)
    grid = cfg.sphere(n)
    max_sec = max_sec or find_max_section(body, density, cfg)
    lhs, err = body_measure_stderr(BodyMeasure(body, density), grid, cfg.radial_nodes)
    vol, verr = _volume(body, cfg)
    rhs = n / (n - 1) * const.slicing_const * max_sec.value * vol ** (1.0 / n)
    rhs_err = rhs / (n * vol) * verr
    return InequalityReport(
        EQ3, n, body.describe(), _density_name(density), lhs, rhs, max_sec.direction, cfg.metadata(),
        numerical_tolerance(rhs, body, cfg, density), stderr=math.hypot(err, rhs_err),
        details={**_volume_details(body, vol), "maxSection": max_sec.value, "slicingConstant": const.slicing_const},
    )


def verify_thm1(body, density, cfg=None, max_sec=None, check_pipeline=True):
    """mu(L) <= sqrt(n) (n/(n-1)) c_n max_xi mu(L ∩ xi^⊥) |L|^{1/n} for convex L.

    With ``check_pipeline`` the report also records the proof's
    intermediate objects: the sandwich certificate for K = sqrt(n) E,
    the composite density f = chi_K + g chi_L with int_K f - |K| = mu(L),
    and the middle bound (n/(n-1)) c_n |K|^{1/n} max_xi mu(L ∩ xi^⊥).
    """
    if not body.convex:
        raise CapabilityError(f"{body.tag} is not convex; the sqrt(n) estimate needs a convex body")
    n = body.dim
    cfg = cfg or GridConfig.for_dim(n)
    const = dimension_constants(n)
    grid = cfg.sphere(n)
    max_sec = max_sec or find_max_section(body, density, cfg)
    lhs, err = body_measure_stderr(BodyMeasure(body, density), grid, cfg.radial_nodes)
    vol, verr = _volume(body, cfg)
    factor = n / (n - 1) * const.slicing_const
    rhs = math.sqrt(n) * factor * max_sec.value * vol ** (1.0 / n)
    rhs_err = rhs / (n * vol) * verr
    tol = numerical_tolerance(rhs, body, cfg, density)
    details = {**_volume_details(body, vol), "maxSection": max_sec.value, "slicingConstant": const.slicing_const}

    if check_pipeline:
        cert = sandwich(body, grid)
        if not cert.passed:
            raise DataError(f"John sandwich failed for {body.describe()}: {cert.diagnostic()}")
        outer = cert.outer
        vol_k = math.exp(outer.log_volume())
        middle = factor * vol_k ** (1.0 / n) * max_sec.value
        composite = CompositeDensity(outer, body, density)
        int_f, _ = body_measure_stderr(BodyMeasure(outer, composite), grid, cfg.radial_nodes)
        # the identity holds ray by ray, so compare against |K| on the same grid
        vol_k_grid = grid.integrate(outer.radial(grid.nodes) ** n) / n
        xi = max_sec.direction
        sec_f = section_measure(BodyMeasure(outer, composite), xi, cfg.section_level, cfg.radial_nodes, cfg.scheme, cfg.seed).value
        sec_k = section_volume(outer, xi, cfg.section_level, cfg.scheme, cfg.seed)
        details.update(
            sandwich=cert.to_dict(),
            outerVolume=vol_k,
            middleBound=middle,
            lhsBelowMiddle=bool(lhs <= middle + tol + 3 * err),
            middleBelowRhs=bool(middle <= rhs + tol),
            outerVolumeRelError=vol_k_grid / vol_k - 1.0,
            compositeExcess=int_f - vol_k_grid,
            compositeResidual=int_f - vol_k_grid - lhs,
            compositeSectionExcess=sec_f - sec_k,
            compositeSectionResidual=sec_f - sec_k - max_sec.value,
        )
    return InequalityReport(
        EQ4, n, body.describe(), _density_name(density), lhs, rhs, max_sec.direction, cfg.metadata(),
        tol, stderr=math.hypot(err, rhs_err), details=details,
    )


VERIFIERS = {EQ1: verify_eq1, EQ2: verify_eq2, EQ3: verify_eq3, EQ4: verify_thm1}


def verify(inequality_id, body, density=None, cfg=None, max_sec=None):
    if inequality_id in (EQ1, EQ2):
        return VERIFIERS[inequality_id](body, cfg, max_sec)
    return VERIFIERS[inequality_id](body, density or Uniform(), cfg, max_sec)


# -- stability ---------------------------------------------------------------------------


def unit_ib_source(n):
    """The ball B whose intersection body is exactly the unit ball B_2^n."""
    const = dimension_constants(n)
    return Ball(n, math.exp(-const.ln_ball_vol_prev / (n - 1)))


def _check_at_least_one(body, density, grid):
    fracs = np.linspace(0.0, 1.0, 9)
    rho = body.radial(grid.nodes)
    pts = fracs[None, :, None] * (rho[:, None, None] * grid.nodes[:, None, :])
    vals = density(pts)
    if np.min(vals) < 1.0 - 1e-12:
        i = np.unravel_index(int(np.argmin(vals)), vals.shape)
        raise DataError(f"the stability estimate needs f >= 1 on K; f = {vals[i]:.6g} at x = {pts[i].tolist()}")


def verify_stability(source, density, cfg=None):
    """Run the stability estimate on K = IB(source) with density f >= 1 on K.

    epsilon is the tight value max_xi (int_{K ∩ xi^⊥} f - |K ∩ xi^⊥|). The
    chain entries are the slacks of the three proof steps: the inequality
    integrated against dmu = rho_source^{n-1}/(n-1) dtheta, the lower bound
    using f >= 1, and the Hölder estimate of epsilon * mu(S^{n-1}).
    """
    n = source.dim
    cfg = cfg or GridConfig.for_dim(n)
    const = dimension_constants(n)
    grid = cfg.sphere(n)
    body = intersection_body_of(source, cfg.section_level, cfg.scheme, cfg.seed)
    _check_at_least_one(body, density, grid)

    rho = body.radial(grid.nodes)
    vol = grid.integrate(rho**n) / n
    int_f = grid.integrate(ray_integrals(density, grid.nodes, rho, n - 1, cfg.radial_nodes))
    excess = max_section(
        BodyMeasure(body, density - Uniform()),
        coarse_level=cfg.coarse_level,
        polish_iters=cfg.polish_iters,
        level=cfg.section_level,
        radial_nodes=cfg.radial_nodes,
        scheme=cfg.scheme,
        seed=cfg.seed,
        net_size=cfg.net_size,
    )
    eps = excess.value
    factor = n / (n - 1) * const.slicing_const
    rhs = vol + factor * vol ** (1.0 / n) * eps

    g = source.radial(grid.nodes) ** (n - 1) / (n - 1)
    mu_total = grid.integrate(g)
    lhs_int = grid.integrate(rho * ray_integrals(density, grid.nodes, rho, n - 2, cfg.radial_nodes))
    rhs_int = grid.integrate(rho**n) / (n - 1) + eps * mu_total
    lower = int_f + vol / (n - 1)

    sub_area = sphere_area(n - 1)
    r1_form = grid.integrate(rho) / sub_area
    holder = sphere_area(n) ** ((n - 1) / n) * (n * vol) ** (1.0 / n) / sub_area
    lhs_hold = eps * mu_total
    rhs_hold = factor * vol ** (1.0 / n) * eps

    chain = {"integrated": rhs_int - lhs_int, "lowerBound": lhs_int - lower, "holder": rhs_hold - lhs_hold}
    details = {
        "volume": vol,
        "integralF": int_f,
        "integratedLhs": lhs_int,
        "integratedRhs": rhs_int,
        "lowerBound": lower,
        "muTotal": mu_total,
        "muTotalViaR1": r1_form,
        "holderBound": holder,
        "holderGap": holder - r1_form,
        "holderLhs": lhs_hold,
        "holderRhs": rhs_hold,
    }
    tol = numerical_tolerance(rhs, body, cfg, density)
    return StabilityReport(
        n, body.describe(), _density_name(density), eps, int_f, rhs, chain, excess.direction,
        cfg.metadata(), tol, details,
    )


# -- Monte Carlo oracle ------------------------------------------------------------------


def mc_oracle(m, samples=10**6, seed=0, chunk=1 << 20):
    """Rejection-sampling estimate of mu(K) in the body's bounding box.

    Returns (estimate, standard error). Uses the Philox counter-based
    generator so a (seed, samples) pair always gives the same numbers.
    """
    if samples < 10**4:
        raise DomainError("mc_oracle needs at least 10^4 samples")
    body, density = m.body, m.density
    half = np.asarray(body.bounding_box(), dtype=float)
    box_vol = float(np.prod(2 * half))
    rng = np.random.Generator(np.random.Philox(seed))
    total = 0.0
    total_sq = 0.0
    hits = 0
    left = int(samples)
    while left:
        k = min(chunk, left)
        x = rng.uniform(-1.0, 1.0, size=(k, body.dim)) * half
        inside = body.gauge(x) <= 1.0
        vals = np.where(inside, density(x), 0.0)
        hits += int(np.count_nonzero(inside))
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        left -= k
    if hits < 1e-6 * samples:
        raise DataError(f"acceptance rate {hits / samples:.2g} is below 1e-6; bounding box too loose")
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return box_vol * mean, box_vol * math.sqrt(var / (samples - 1))


# -- the standard matrix ---------------------------------------------------------------

SUITE_DENSITIES = ("uniform", "gaussian", "sq-norm", "bump")
SUITE_DIMS = tuple(range(2, 11))


def suite_bodies(n, seed=0):
    """The standard convex bodies in R^n, keyed by a short label."""
    from .bodies import CrossPolytope, random_hpolytope

    return {
        "ball": Ball(n),
        "cube": Cube(n),
        "cross-polytope": CrossPolytope(n),
        "lp1": LpBall(n, 1.0),
        "lp1.5": LpBall(n, 1.5),
        "lp3": LpBall(n, 3.0),
        "h-polytope": random_hpolytope(n, seed=seed),
    }


def run_suite(dims=SUITE_DIMS, densities=SUITE_DENSITIES, seed=0, scheme=None, progress=None):
    """verify_thm1 over bodies x densities x dims; returns the list of reports.

    ``progress`` is called with each finished report.
    """
    from .measures import density_from_spec

    reports = []
    for n in dims:
        cfg = GridConfig.for_dim(n, scheme, seed=seed)
        for label, body in suite_bodies(n, seed).items():
            for dname in densities:
                rep = verify_thm1(body, density_from_spec(dname), cfg)
                # full specs of random polytopes are long; the label plus seed replays them
                rep.body = f"{label}(seed={seed})" if label == "h-polytope" else label
                reports.append(rep)
                if progress:
                    progress(rep)
    return reports


class _SliceBody(StarBody):
    """K ∩ xi^⊥ in the coordinates of an orthonormal basis of xi^⊥."""

    tag = "slice"

    def __init__(self, body, basis):
        super().__init__(body.dim - 1)
        self.body = body
        self.basis = basis
        self._half = float(np.linalg.norm(body.bounding_box()))

    def _radial(self, thetas):
        return self.body.radial(thetas @ self.basis.T)

    def bounding_box(self):
        return np.full(self.dim, self._half)


def section_mc_oracle(m, xi, samples=10**6, seed=0):
    """Rejection-sampling estimate of mu(K ∩ xi^⊥) inside the slice; (estimate, stderr)."""
    if m.body.dim < 3:
        raise CapabilityError("slices of planar bodies are segments; use the chord length")
    xi = as_direction(xi, m.body.dim)
    basis = orthonormal_frame(xi).basis
    density = m.density
    sliced = FunctionDensity(lambda y: density(y @ basis.T), name="slice")
    return mc_oracle(BodyMeasure(_SliceBody(m.body, basis), sliced), samples, seed)

