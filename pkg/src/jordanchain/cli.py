"""Batch front end.

    jordanchain <command> --config run.cfg --output out/ [--jobs N] [--tolerance-scale X]

Each command reads a ``key = value`` config, checks its required keys
before computing anything, builds every artifact in memory and only then
writes them (each through a temporary file and a rename).  A run leaves
CSV tables, an SVG plot per table and ``manifest.json``.

Exit status: 0 on success, 2 on bad input, 3 on numerical failure (and
for ``verify`` when any criterion fails).
"""

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kvformat
from .errors import JordanChainError, ValidationError
from .numerics import GridField, RootSolveSpec, spectral_derivative

COMMANDS = ("bh-solve", "jordan-solve", "catastrophe", "exponents", "average",
            "density", "burgers", "kdv", "el", "verify")

# required keys, then optional keys with defaults
PARAMETERS = {
    "bh-solve": (("tilde_coeffs", "x_min", "x_max", "n_points", "t"), {"seed": None}),
    "jordan-solve": (("N", "tilde_coeffs", "x_min", "x_max", "n_points", "t_end", "dt"),
                     {"t_start": 0.0, "scheme": "upwind", "seed": None}),
    "catastrophe": (("N", "tilde_coeffs", "k", "seed_u"),
                    {"times": [0.0, 0.0], "free_times": None}),
    "exponents": (("N", "tilde_coeffs", "k", "seed_u"),
                  {"times": [0.0, 0.0], "free_times": None, "time_ratio": 0.0,
                   "offsets": None}),
    "average": (("N", "params", "tilde_coeffs"), {"times": [0.0, 0.0], "n_max": 6}),
    "density": (("N", "params", "u_min", "u_max", "n_points"), {}),
    "burgers": (("nu", "t", "n_points"),
                {"mean": 0.2, "amplitude": 0.5, "length": 2 * math.pi, "M": 4}),
    "kdv": (("c", "t"), {"position": 0.0, "length": 40.0, "n_points": 256, "dt": None}),
    "el": (("k", "a", "tau", "A", "y_min", "y_max", "n_points"), {}),
    "verify": ((), {}),
}


@dataclass
class RunConfig:
    command: str
    parameters: dict
    output_dir: str
    jobs: int = 1
    tolerance_scale: float = 1.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        required, optional = PARAMETERS[self.command]
        missing = [k for k in required if k not in self.parameters]
        if missing:
            raise ValidationError(f"{self.command}: missing required keys: {', '.join(missing)}")
        known = set(required) | set(optional)
        extra = sorted(set(self.parameters) - known)
        if extra:
            raise ValidationError(f"{self.command}: unknown keys: {', '.join(extra)}")
        merged = dict(optional)
        merged.update(self.parameters)
        self.parameters = merged
        if self.jobs < 1:
            raise ValidationError("--jobs must be >= 1")
        if not self.tolerance_scale > 0:
            raise ValidationError("--tolerance-scale must be positive")

    def get(self, key):
        return self.parameters[key]

    def floats(self, key):
        v = self.parameters[key]
        v = v if isinstance(v, list) else [v]
        try:
            return [float(x) for x in v]
        except (TypeError, ValueError):
            raise ValidationError(f"{key} must hold numbers, got {v!r}") from None

    def number(self, key):
        v = self.parameters[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{key} must be a number, got {v!r}")
        return float(v)

    def integer(self, key):
        v = self.parameters[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationError(f"{key} must be an integer, got {v!r}")
        return v


@dataclass
class Artifacts:
    """Everything a run produces, held until the run has succeeded."""

    tables: dict = field(default_factory=dict)
    plots: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def table(self, name, header, columns, plot=None):
        self.tables[name] = (list(header), [np.asarray(c, dtype=float) for c in columns])
        if plot is not None:
            self.plots.append((name, plot))


def csv_text(header, columns):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join("%.17g" % v for v in row) + "\n")
    return buf.getvalue()


def _rs(cfg):
    return RootSolveSpec(residual_tol=1e-12 * cfg.tolerance_scale)


def _bh_spec(cfg, N=1):
    from .potential import PotentialSpec
    return PotentialSpec(N, (0.0, 0.0), tuple(cfg.floats("tilde_coeffs")))


def _grid(cfg):
    n = cfg.integer("n_points")
    lo, hi = cfg.number("x_min"), cfg.number("x_max")
    if n < 2 or not lo < hi:
        raise ValidationError("need n_points >= 2 and x_min < x_max")
    return GridField.linspace(lo, hi, n)


def _seed(cfg):
    return None if cfg.get("seed") is None else cfg.floats("seed")


def run_bh_solve(cfg, art):
    from .hodograph import solve_grid
    spec = _bh_spec(cfg)
    t = cfg.number("t")
    sol = solve_grid(spec, _grid(cfg), t, _seed(cfg), _rs(cfg))
    x = sol.field.x
    art.table("bh_solution", ["x", "u", "residual"], [x, sol.field.values, sol.residuals],
              plot=("x", ["u"]))
    art.summary.update(t=t, flagged_points=len(sol.failed))


def run_jordan_solve(cfg, art):
    from .hodograph import solve_grid
    from .jordan import JordanState, evolve_direct
    N = cfg.integer("N")
    spec = _bh_spec(cfg, N)
    grid = _grid(cfg)
    t0, t1 = cfg.number("t_start"), cfg.number("t_end")
    start = solve_grid(spec, grid, t0, _seed(cfg), _rs(cfg))
    if start.failed:
        raise ValidationError(f"initial hodograph solve failed at {len(start.failed)} points")
    state = JordanState.from_grid_solution(start)
    end = evolve_direct(state, cfg.number("dt"), t1, cfg.get("scheme"))
    ref = solve_grid(spec, grid, t1, state.fields[:, 0], _rs(cfg))
    rv = ref.field.values.reshape(len(grid.x), N).T
    header = ["x"] + [f"u{l}" for l in range(1, N + 1)] + [f"u{l}_hodograph" for l in range(1, N + 1)]
    art.table("jordan_solution", header, [grid.x] + list(end.fields) + list(rv),
              plot=("x", header[1:]))
    ok = np.isfinite(rv).all(axis=0)
    gap = float(np.max(np.abs(end.fields[:, ok] - rv[:, ok]))) if ok.any() else float("nan")
    art.summary.update(t_end=t1, scheme=cfg.get("scheme"), max_gap_to_hodograph=gap)


def _catastrophe(cfg):
    from .potential import PotentialSpec
    from .singularity import find_catastrophe
    spec = PotentialSpec(cfg.integer("N"), tuple(cfg.floats("times")), tuple(cfg.floats("tilde_coeffs")))
    free = None if cfg.get("free_times") is None else [int(v) for v in cfg.floats("free_times")]
    cat = find_catastrophe(spec, cfg.integer("k"), cfg.floats("seed_u"), free, _rs(cfg))
    return spec, cat


def _fit(args):
    spec, cat, l, offsets, ratio = args
    from .singularity import scaling_exponent_fit
    return scaling_exponent_fit(spec, cat, l, offsets, ratio)


def _fits(cfg, spec, cat, time_ratio=0.0, offsets=None):
    tasks = [(spec, cat, l, offsets, time_ratio) for l in range(1, cat.N + 1)]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_fit, tasks))
    return [_fit(t) for t in tasks]


def run_catastrophe(cfg, art):
    spec, cat = _catastrophe(cfg)
    fit = _fits(cfg, spec, cat)[0]
    N = cat.N
    header = ["x0", "t0"] + [f"u0_{l}" for l in range(1, N + 1)] + ["k", "slope"]
    cols = [[cat.x0], [cat.t0]] + [[v] for v in cat.u0.u] + [[cat.order_k], [fit.slope]]
    art.table("catastrophe", header, cols)
    art.summary.update(A_coeff=cat.A_coeff, times=list(cat.times))


def run_exponents(cfg, art):
    from .singularity import predicted_exponent
    spec, cat = _catastrophe(cfg)
    offsets = None if cfg.get("offsets") is None else cfg.floats("offsets")
    fits = _fits(cfg, spec, cat, cfg.number("time_ratio"), offsets)
    ls = list(range(1, cat.N + 1))
    pred = [float(predicted_exponent(cat.N, cat.order_k, l)) for l in ls]
    art.table("exponents", ["l", "fitted", "predicted", "r_squared"],
              [ls, [f.slope for f in fits], pred, [f.r_squared for f in fits]])
    art.summary.update(N=cat.N, k=cat.order_k)


def _dspec(cfg):
    from .distributions import DistributionSpec
    return DistributionSpec(cfg.integer("N"), tuple(cfg.floats("params")))


def run_average(cfg, art):
    from .distributions import average_potential, moment
    from .potential import PotentialSpec
    from .schur import schur_eval
    ds = _dspec(cfg)
    n_max = cfg.integer("n_max")
    if n_max < 0:
        raise ValidationError("n_max must be >= 0")
    spec1 = PotentialSpec(1, tuple(cfg.floats("times")), tuple(cfg.floats("tilde_coeffs")))
    avg, numeric = average_potential(spec1, ds)
    ns = list(range(n_max + 1))
    art.table("moments", ["n", "moment", "schur"],
              [ns, [moment(ds, n) for n in ns], [schur_eval(list(ds.params), n) for n in ns]])
    art.summary.update(averaged_W_numeric=numeric(), averaged_W_exact=avg.exact(ds.params),
                       regulated=avg.regulated)


def run_density(cfg, art):
    from .distributions import density_eval
    ds = _dspec(cfg)
    n = cfg.integer("n_points")
    lo, hi = cfg.number("u_min"), cfg.number("u_max")
    if n < 2 or not lo < hi:
        raise ValidationError("need n_points >= 2 and u_min < u_max")
    u = np.linspace(lo, hi, n)
    art.table("density", ["u", "G"], [u, density_eval(ds, u)], plot=("u", ["G"]))


def run_burgers(cfg, art):
    from .reductions import BurgersConfig, burgers_cole_hopf_solve, momenta_from_burgers
    nu, t = cfg.number("nu"), cfg.number("t")
    M = cfg.integer("M")
    g = GridField.periodic_grid(0.0, cfg.number("length"), cfg.integer("n_points"))
    phi = cfg.number("mean") + cfg.number("amplitude") * np.sin(2 * math.pi * g.x / cfg.number("length"))
    u1, _ = burgers_cole_hopf_solve(BurgersConfig(nu, g.with_values(phi)), t)
    state = momenta_from_burgers(u1, nu, M)
    header = ["x"] + [f"u{l}" for l in range(1, M + 1)]
    art.table("burgers_momenta", header, [g.x] + list(state.fields), plot=("x", header[1:]))
    art.summary.update(t=t, nu=nu)


def run_kdv(cfg, art):
    from .reductions import kdv_soliton, kdv_solve
    c = cfg.number("c")
    if not c > 0:
        raise ValidationError("soliton speed c must be positive")
    L, t = cfg.number("length"), cfg.number("t")
    g = GridField.periodic_grid(-L / 2, L, cfg.integer("n_points"))
    x = g.x - cfg.number("position")
    dt = None if cfg.get("dt") is None else cfg.number("dt")
    u = kdv_solve(g.with_values(kdv_soliton(x, 0.0, c)), t, dt)
    exact = kdv_soliton(x, t, c)
    art.table("kdv", ["x", "u", "u_soliton"], [g.x, u.values, exact], plot=("x", ["u", "u_soliton"]))
    art.summary.update(t=t, max_gap_to_soliton=float(np.max(np.abs(u.values - exact))))


def run_el(cfg, art):
    from .reductions import ElProblem, el_solve
    prob = ElProblem(cfg.integer("k"), cfg.number("a"), cfg.number("tau"), cfg.number("A"),
                     (cfg.number("y_min"), cfg.number("y_max")), cfg.integer("n_points"))
    v = el_solve(prob, tol=1e-8 * cfg.tolerance_scale)
    vy = spectral_derivative(v, 1).values
    art.table("el_solution", ["y", "v", "v_y"], [v.x, v.values, vy], plot=("y", ["v"]))
    art.summary.update(max_abs_v_y=float(np.max(np.abs(vy))))


def run_verify(cfg, art):
    from .acceptance import run_all
    results = run_all(cfg.tolerance_scale, cfg.jobs)
    for r in results:
        print(r.line())
    art.table("verify", ["criterion", "passed"],
              [[r.number for r in results], [1.0 if r.passed else 0.0 for r in results]])
    art.summary["passed"] = all(r.passed for r in results)
    art.summary["criteria"] = {str(r.number): {"title": r.title, "passed": r.passed, "details": r.details}
                               for r in results}


RUNNERS = {
    "bh-solve": run_bh_solve, "jordan-solve": run_jordan_solve, "catastrophe": run_catastrophe,
    "exponents": run_exponents, "average": run_average, "density": run_density,
    "burgers": run_burgers, "kdv": run_kdv, "el": run_el, "verify": run_verify,
}


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def write_artifacts(cfg, art):
    from .plotting import line_plot
    out = cfg.output_dir
    written = []
    for name, (header, cols) in art.tables.items():
        path = os.path.join(out, name + ".csv")
        kvformat.atomic_write(path, csv_text(header, cols))
        written.append(os.path.basename(path))
    for name, (xlabel, ys) in art.plots:
        header, cols = art.tables[name]
        series = {h: cols[header.index(h)] for h in ys}
        path = os.path.join(out, name + ".svg")
        line_plot(path, cols[header.index(xlabel)], series, xlabel=xlabel, title=name)
        written.append(os.path.basename(path))
    manifest = {
        "command": cfg.command,
        "version": __version__,
        "parameters": _jsonable(cfg.parameters),
        "tolerance_scale": cfg.tolerance_scale,
        "files": written,
        "summary": _jsonable(art.summary),
    }
    kvformat.atomic_write(os.path.join(out, "manifest.json"),
                          json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written


def run(cfg):
    """Execute one configured command; returns (exit status, Artifacts)."""
    art = Artifacts()
    RUNNERS[cfg.command](cfg, art)
    write_artifacts(cfg, art)
    if cfg.command == "verify" and not art.summary["passed"]:
        return 3, art
    return 0, art


def build_parser():
    p = argparse.ArgumentParser(prog="jordanchain", description="Jordan chain hodograph and regularization tools")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH", help="key = value parameter file")
    p.add_argument("--output", metavar="DIR", default="output", help="directory for CSV, SVG and manifest")
    p.add_argument("--jobs", metavar="N", type=int, default=1, help="worker processes")
    p.add_argument("--tolerance-scale", metavar="X", type=float, default=1.0,
                   help="multiplies solver tolerances (verify: acceptance tolerances)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "verify":
                raise ValidationError(f"{args.command} needs --config")
            params = {}
        else:
            params = kvformat.read_file(args.config)
        cfg = RunConfig(args.command, params, args.output, args.jobs, args.tolerance_scale)
        status, art = run(cfg)
    except JordanChainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.command != "verify":
        for name in art.tables:
            print(os.path.join(cfg.output_dir, name + ".csv"))
    return status


if __name__ == "__main__":
    sys.exit(main())
