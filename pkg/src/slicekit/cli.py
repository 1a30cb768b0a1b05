"""Command-line front end.

    slicekit verify --ineq eq4 --body '{"type":"ball","dim":3}' --density uniform
    slicekit stability --body '{"type":"lp-ball","dim":3,"p":4}' --density '1+0.2*bump(2)'
    slicekit radon-selftest --dim 3 --level 32
    slicekit oracle --body '{"type":"ball","dim":3}' --density gaussian --samples 1000000
    slicekit suite --out suite.csv
    slicekit bodies --dim 3

Exit codes: 0 pass, 1 inequality or self-test failure, 2 usage error,
3 bad data, 4 unsupported request.
"""

import argparse
import csv
from dataclasses import dataclass, replace
import datetime
import io
import json
import math
from pathlib import Path
import sys

import numpy as np

from . import lab
from .bodies import body_from_spec
from .errors import DataError, SliceKitError
from .measures import BodyMeasure, Uniform, body_measure, density_from_spec
from .radon import constant, radon_transform, selfdual_sides, trig_polynomial
from .scalars import sphere_area
from .sphere import MONTE_CARLO, normalize_scheme, sphere_grid

COMMANDS = ("bodies", "verify", "stability", "radon-selftest", "oracle", "suite")
INEQ_IDS = {"eq1": lab.EQ1, "eq2": lab.EQ2, "eq3": lab.EQ3, "eq4": lab.EQ4}

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(SliceKitError):
    exit_code = EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    ineq: str = None
    body: str = None
    density: str = "uniform"
    dim: int = None
    dims: tuple = None
    level: int = None
    scheme: str = None
    seed: int = 0
    radial_nodes: int = None
    samples: int = 10**6
    out: str = None
    fmt: str = "json"
    threads: int = 1
    timestamps: bool = False


def _common(p):
    p.add_argument("--dim", type=int)
    p.add_argument("--level", type=int)
    p.add_argument("--scheme", choices=["gauss", "mc", "product-gauss", "monte-carlo"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radial-nodes", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], dest="fmt")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timestamps", action="store_true")


def build_parser():
    parser = _Parser(prog="slicekit", description="Slicing inequalities for intersection bodies and arbitrary measures.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("bodies", help="list body types and their parameters")
    _common(p)
    p = sub.add_parser("verify", help="check one of the inequalities eq1-eq4")
    p.add_argument("--ineq", required=True, choices=sorted(INEQ_IDS))
    p.add_argument("--body", required=True, help="inline JSON or a path to a JSON file")
    p.add_argument("--density", default="uniform")
    _common(p)
    p = sub.add_parser("stability", help="the stability estimate on K = IB(body)")
    p.add_argument("--body", required=True, help="the source body L; K = IB(L)")
    p.add_argument("--density", required=True)
    _common(p)
    p = sub.add_parser("radon-selftest", help="self-duality and pairing checks of the Radon transform")
    _common(p)
    p = sub.add_parser("oracle", help="quadrature vs rejection-sampling Monte Carlo")
    p.add_argument("--body", required=True)
    p.add_argument("--density", default="uniform")
    p.add_argument("--samples", type=int, default=10**6)
    _common(p)
    p = sub.add_parser("suite", help="the sqrt(n) estimate over the standard body/density matrix")
    p.add_argument("--dims", default="2-10", help="range like 2-10 or a comma list")
    _common(p)
    return parser


def _parse_dims(text):
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"argument --dims: cannot parse {text!r}") from None


def parse_config(argv):
    """argv (without the program name) -> validated RunConfig."""
    ns = build_parser().parse_args(argv)
    if ns.dim is not None and ns.dim < 2:
        raise UsageError(f"argument --dim: must be >= 2, got {ns.dim}")
    if ns.level is not None and ns.level < 4:
        raise UsageError(f"argument --level: must be >= 4, got {ns.level}")
    if ns.radial_nodes is not None and ns.radial_nodes < 1:
        raise UsageError("argument --radial-nodes: must be positive")
    if ns.threads < 1:
        raise UsageError("argument --threads: must be positive")
    dims = None
    if ns.command == "suite":
        dims = _parse_dims(ns.dims)
        if not dims or min(dims) < 2:
            raise UsageError("argument --dims: dimensions must be >= 2")
    fmt = ns.fmt or ("csv" if ns.command == "suite" else "json")
    return RunConfig(
        command=ns.command,
        ineq=INEQ_IDS.get(getattr(ns, "ineq", None)),
        body=getattr(ns, "body", None),
        density=getattr(ns, "density", "uniform"),
        dim=ns.dim,
        dims=dims,
        level=ns.level,
        scheme=normalize_scheme(ns.scheme) if ns.scheme else None,
        seed=ns.seed,
        radial_nodes=ns.radial_nodes,
        samples=getattr(ns, "samples", 10**6),
        out=ns.out,
        fmt=fmt,
        threads=ns.threads,
        timestamps=ns.timestamps,
    )


# -- commands -------------------------------------------------------------------------


def _load_body(text, dim):
    if not text.lstrip().startswith("{"):
        path = Path(text)
        if not path.is_file():
            raise DataError(f"--body: {text!r} is neither inline JSON nor a readable file")
        text = path.read_text()
    body = body_from_spec(text)
    if dim is not None and body.dim != dim:
        raise DataError(f"--dim {dim} disagrees with the body's dim {body.dim}")
    return body


def _grid_config(cfg, n):
    plan = lab.GridConfig.for_dim(n, cfg.scheme, seed=cfg.seed)
    if cfg.level is not None:
        plan = replace(plan, level=cfg.level, section_level=cfg.level)
    if cfg.radial_nodes is not None:
        plan = replace(plan, radial_nodes=cfg.radial_nodes)
    return plan


def _cmd_verify(cfg):
    body = _load_body(cfg.body, cfg.dim)
    density = density_from_spec(cfg.density)
    rep = lab.verify(cfg.ineq, body, density, _grid_config(cfg, body.dim))
    return [rep], rep.passed


def _cmd_stability(cfg):
    source = _load_body(cfg.body, cfg.dim)
    rep = lab.verify_stability(source, density_from_spec(cfg.density), _grid_config(cfg, source.dim))
    return [rep], rep.passed


def _cmd_suite(cfg):
    reps = lab.run_suite(cfg.dims, seed=cfg.seed, scheme=cfg.scheme)
    return reps, all(r.passed for r in reps)


def _cmd_radon(cfg):
    n = cfg.dim or 3
    level = cfg.level or 32
    scheme = cfg.scheme or "product-gauss"
    grid = sphere_grid(n, level, scheme, cfg.seed)
    f = trig_polynomial(n, seed=cfg.seed)
    g = trig_polynomial(n, seed=cfg.seed + 1)
    lhs, rhs = selfdual_sides(f, g, grid, level)
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    xis = rng.standard_normal((100, n))
    xis /= np.linalg.norm(xis, axis=1, keepdims=True)
    r1 = radon_transform(constant(n), xis, level, scheme, cfg.seed)
    area = sphere_area(n - 1)
    r1_err = float(np.max(np.abs(r1 - area)) / area)
    tol_sd = 1e-5 if scheme != MONTE_CARLO else 5e-2
    tol_r1 = 1e-8 if scheme != MONTE_CARLO else 1e-12
    passed = rel < tol_sd and r1_err < tol_r1
    report = {
        "command": "radon-selftest",
        "n": n,
        "grid": {"scheme": grid.scheme, "level": level, "seed": grid.seed},
        "selfdualLhs": lhs,
        "selfdualRhs": rhs,
        "selfdualResidual": abs(lhs - rhs),
        "selfdualRelative": rel,
        "constantTransformMaxRelError": r1_err,
        "pass": passed,
    }
    return [report], passed


def _cmd_oracle(cfg):
    body = _load_body(cfg.body, cfg.dim)
    density = density_from_spec(cfg.density)
    m = BodyMeasure(body, density)
    plan = _grid_config(cfg, body.dim)
    quad = body_measure(m, plan.sphere(body.dim), plan.radial_nodes)
    est, err = lab.mc_oracle(m, cfg.samples, cfg.seed)
    z = (est - quad) / err if err > 0 else (0.0 if est == quad else math.inf)
    report = {
        "command": "oracle",
        "n": body.dim,
        "body": body.describe(),
        "density": lab._density_name(density),
        "quadrature": quad,
        "monteCarlo": est,
        "stderr": err,
        "z": z,
        "samples": cfg.samples,
        "grid": plan.metadata(),
        "pass": abs(z) <= 3.0,
    }
    return [report], report["pass"]


def _cmd_bodies(cfg):
    n = cfg.dim or 3
    rows = [
        {"type": "ball", "params": {"dim": n, "radius": 1.0}},
        {"type": "lp-ball", "params": {"dim": n, "p": 4}},
        {"type": "cube", "params": {"dim": n, "halfwidth": 1.0}},
        {"type": "cross-polytope", "params": {"dim": n}},
        {"type": "ellipsoid", "params": {"dim": n, "matrix": np.eye(n).reshape(-1).tolist()}},
        {"type": "h-polytope", "params": {"dim": n, "facets": "[[a_1, ..., a_n, b], ...] (mirror pairs required)"}},
        {"type": "scaled", "params": {"base": "<body>", "factor": 2.0}},
        {"type": "rotated", "params": {"base": "<body>", "rotation": "row-major n x n orthogonal matrix"}},
        {"type": "intersection-body", "params": {"source": "<body>", "level": 32}},
    ]
    for row in rows:
        spec = dict(type=row["type"], **row["params"])
        try:
            body = body_from_spec(spec)
        except (DataError, SliceKitError, TypeError, ValueError):
            continue
        row["describe"] = body.describe()
    return rows, True


_DISPATCH = {
    "bodies": _cmd_bodies,
    "verify": _cmd_verify,
    "stability": _cmd_stability,
    "radon-selftest": _cmd_radon,
    "oracle": _cmd_oracle,
    "suite": _cmd_suite,
}


def _as_dict(rep):
    return rep if isinstance(rep, dict) else rep.to_dict()


def render(cfg, reports):
    """Serialize reports; identical inputs give identical bytes."""
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(lab.CSV_COLUMNS)
        for rep in reports:
            if isinstance(rep, dict):
                raise DataError(f"{cfg.command} has no CSV form; use --format json")
            w.writerow(rep.csv_row())
        return buf.getvalue()
    items = [_as_dict(r) for r in reports]
    doc = items[0] if len(items) == 1 and cfg.command != "bodies" else items
    if cfg.timestamps:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        doc = {"timestamp": stamp, "reports": doc} if isinstance(doc, list) else dict(doc, timestamp=stamp)
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def run(cfg):
    """Execute a RunConfig; returns (exit code, rendered report)."""
    reports, passed = _DISPATCH[cfg.command](cfg)
    text = render(cfg, reports)
    return (EXIT_PASS if passed else EXIT_FAIL), text


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        code, text = run(cfg)
    except SliceKitError as exc:
        print(f"slicekit: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
