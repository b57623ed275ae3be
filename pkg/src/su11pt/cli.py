"""Command-line front end: ``verify``, ``berry``, ``evolve`` and ``sweep``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration,
3 numeric failure.  Output tables are deterministic: floats are written with
17 significant digits, rows in a fixed order, and timing goes to stderr only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import algebra, biortho, invariant, model, phases, propagator
from .errors import NumericError, SU11Error

SCHEMA = "# su11-pt-dynamics schema v1"

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    Omega: float = 1.0
    G: float = 1.0
    omega: float = 1.0
    branch: str = "minus"
    sector: str = "even"
    dim: int = 48
    interior: int | None = None
    levels: list = field(default_factory=lambda: [0, 2, 4])
    t: float = 0.3
    check_times: list = field(default_factory=lambda: [0.0, 0.4, 1.9])
    quad_steps: int = 4096
    ode_steps: int = 20000
    periods: float = 1.0
    samples: int = 21
    perturb_eta: float | None = None
    sweep_param: str = "omega"
    sweep_values: list = field(default_factory=list)
    grid_omega: list | None = None
    grid_G: list | None = None
    threads: int = 1
    out: str | None = None
    format: str = "csv"

    # -- derived -----------------------------------------------------------
    @property
    def interior_dim(self) -> int:
        return self.dim // 2 if self.interior is None else int(self.interior)

    def params(self, **over) -> model.ModelParams:
        vals = {"Omega": self.Omega, "G": self.G, "omega": self.omega}
        vals.update(over)
        return model.ModelParams(**vals)

    def rep(self) -> algebra.TruncatedRep:
        return algebra.build_rep(algebra.Sector.parse(self.sector), self.dim)

    def validate(self) -> "RunConfig":
        for name in ("Omega", "G", "omega", "t", "periods"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number, got {v!r}")
        try:
            invariant.Branch.parse(self.branch)
        except ValueError:
            raise ConfigError(f"branch must be 'minus' or 'plus', got {self.branch!r}") from None
        try:
            sector = algebra.Sector.parse(self.sector)
        except (ValueError, SU11Error) as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(self.dim, int) or self.dim < 2:
            raise ConfigError(f"dim must be an integer >= 2, got {self.dim!r}")
        n = self.interior_dim
        if n < 1 or n > self.dim:
            raise ConfigError(f"interior must lie in 1..dim, got {n}")
        if not self.levels:
            raise ConfigError("levels must not be empty")
        rep = algebra.build_rep(sector, self.dim)
        for lv in self.levels:
            try:
                m = rep.sector_index(lv)
            except SU11Error as exc:
                raise ConfigError(str(exc)) from None
            if m >= n:
                raise ConfigError(f"level n={lv} (state {m}) is outside the interior block of {n} states")
        if not 16 <= self.quad_steps <= 1 << 20 or self.quad_steps % 2:
            raise ConfigError("quad_steps must be even and within 16..1048576")
        if not 1 <= self.ode_steps <= 10_000_000:
            raise ConfigError("ode_steps must be within 1..10000000")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.sweep_param not in ("omega", "G"):
            raise ConfigError("sweep_param must be omega or G")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        return self


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def render_csv(columns, rows) -> str:
    lines = [SCHEMA, ",".join(columns)]
    lines += [",".join(fmt(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render_json(envelope) -> str:
    return json.dumps(_jsonable(envelope), sort_keys=True, indent=1) + "\n"


def emit(cfg: RunConfig, columns, rows, extra=None) -> None:
    if cfg.format == "csv":
        text = render_csv(columns, rows)
    else:
        env = {"schema": SCHEMA.lstrip("# "), "config": asdict(cfg), "columns": list(columns), "rows": rows}
        if extra:
            env.update(extra)
        text = render_json(env)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def _row(name, value, tol, relation="<="):
    value = float(value)
    ok = value <= tol if relation == "<=" else value > tol
    return {"check": name, "value": value, "tolerance": float(tol), "relation": relation, "pass": bool(ok)}


def verify_rows(cfg: RunConfig, lite: bool = False, params=None):
    params = params or cfg.params()
    rep = cfg.rep()
    n = cfg.interior_dim
    sol = invariant.solve_eta(params, cfg.branch)
    rows = []
    if not lite:
        block = min(n, rep.interior_dim)
        r = algebra.commutator_residual(rep, block=block)
        # the stored amplitudes are rounded square roots, so the identities hold
        # to machine precision relative to the entry size, not absolutely
        rows.append(_row("commutator", max(r), 1e-13 * max(1.0, rep.eigenvalue(block - 1))))
        rows.append(_row("aux_condition", sol.aux_residual, 1e-12))
        rows.append(_row("pt_covariance", max(model.pt_covariance_residual(params, t, rep) for t in cfg.check_times), 1e-13))
    for t in cfg.check_times:
        rows.append(_row(f"invariant_condition[t={fmt(t)}]",
                         invariant.invariant_condition_residual(sol, params, t, rep, n), 1e-10))
    if cfg.perturb_eta:
        bad = sol.perturbed(cfg.perturb_eta)
        worst = max(invariant.invariant_condition_residual(bad, params, t, rep, n) for t in cfg.check_times)
        rows.append(_row("invariant_condition_perturbed", worst, 1e-3, ">"))
    t = cfg.t
    rows.append(_row("similarity_relations",
                     invariant.similarity_relations_residual(sol, params, t, rep, n, method="group"), 1e-9))
    if abs(math.tan(0.5 * sol.eta)) < 1.0:
        rows.append(_row("similarity_relations_matrix",
                         invariant.similarity_relations_residual(sol, params, t, rep, n), 1e-9))
    rows.append(_row("generator_derivative", invariant.generator_derivative_residual(sol, params, t, rep, interior=n), 1e-9))
    rows.append(_row("biorthogonality", biortho.biorthogonality_residual(sol, params, t, rep, n), 1e-10))
    rows.append(_row("completeness", biortho.completeness_residual(sol, params, t, rep, n), 1e-10))
    if not lite:
        rows.append(_row("metric_hermiticity", biortho.metric_hermiticity_residual(sol, params, t, rep), 1e-12))
        rows.append(_row("metric_gram", biortho.metric_gram_residual(sol, params, t, rep, n), 1e-10))
        rows.append(_row("metric_min_pivot", biortho.metric_min_pivot(sol, params, t, rep), 0.0, ">"))
    if params.omega != 0:
        T = abs(params.period)
        rows.append(_row("metric_conservation",
                         propagator.metric_conservation_residual(params, sol, T * cfg.periods, rep, n), 1e-8))
    return rows


CHECK_COLUMNS = ["check", "value", "tolerance", "relation", "pass"]


def cmd_verify(cfg: RunConfig) -> int:
    rows = verify_rows(cfg)
    ok = all(r["pass"] for r in rows)
    emit(cfg, CHECK_COLUMNS, rows, {"status": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


BERRY_COLUMNS = ["sweep", "value", "n", "gamma_closed", "gamma_numeric", "gamma_adiabatic", "abs_diff"]


def _berry_point(cfg: RunConfig, value: float):
    params = cfg.params(**{cfg.sweep_param: value})
    rep = cfg.rep()
    sol = invariant.solve_eta(params, cfg.branch)
    out = []
    for lv in cfg.levels:
        closed = phases.berry_phase_closed(params, lv, sol.branch)
        adiab = phases.berry_phase_adiabatic(params, lv, sol.branch)
        if params.omega != 0:
            num = phases.berry_phase_numeric(params, sol, lv, rep, cfg.quad_steps).real
        else:
            num = float("nan")
        out.append({"sweep": cfg.sweep_param, "value": value, "n": int(lv), "gamma_closed": closed,
                    "gamma_numeric": num, "gamma_adiabatic": adiab, "abs_diff": abs(num - closed)})
    return out


def _run_points(fn, points, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def cmd_berry(cfg: RunConfig) -> int:
    values = cfg.sweep_values or [getattr(cfg, cfg.sweep_param)]
    rows = [r for chunk in _run_points(lambda v: _berry_point(cfg, float(v)), values, cfg.threads) for r in chunk]
    emit(cfg, BERRY_COLUMNS, rows)
    return EXIT_OK


EVOLVE_COLUMNS = ["t", "metric_norm", "plain_norm", "energy_re", "energy_im", "fidelity"]


def cmd_evolve(cfg: RunConfig) -> int:
    params = cfg.params()
    if params.omega == 0:
        raise ConfigError("evolve needs omega != 0 to define the period")
    rep = cfg.rep()
    sol = invariant.solve_eta(params, cfg.branch)
    T = abs(params.period) * cfg.periods
    times = np.linspace(0.0, T, cfg.samples)
    psi = np.zeros(rep.dim, dtype=np.complex128)
    psi[rep.sector_index(cfg.levels[0])] = 1.0
    psi0 = propagator.metric_normalize(psi, params, sol, rep)
    density = cfg.ode_steps / abs(params.period)
    traj = propagator.evolve_state(psi0, params, sol, times, rep, "analytic", compare=True, step_density=density)
    rows = [{"t": r.t, "metric_norm": r.metric_norm, "plain_norm": r.plain_norm,
             "energy_re": r.energy.real, "energy_im": r.energy.imag, "fidelity": r.fidelity}
            for r in traj.records]
    emit(cfg, EVOLVE_COLUMNS, rows)
    return EXIT_OK


SWEEP_COLUMNS = ["omega", "G", "kind", "name", "n", "value", "tolerance", "pass"]


def _sweep_point(cfg: RunConfig, point):
    omega, G = point
    params = cfg.params(omega=omega, G=G)
    rows = []
    for r in verify_rows(cfg, lite=True, params=params):
        rows.append({"omega": omega, "G": G, "kind": "check", "name": r["check"], "n": None,
                     "value": r["value"], "tolerance": r["tolerance"], "pass": r["pass"]})
    sol = invariant.solve_eta(params, cfg.branch)
    for lv in cfg.levels:
        rows.append({"omega": omega, "G": G, "kind": "phase", "name": "berry_closed", "n": int(lv),
                     "value": phases.berry_phase_closed(params, lv, sol.branch), "tolerance": None, "pass": None})
        rows.append({"omega": omega, "G": G, "kind": "phase", "name": "lr_phase", "n": int(lv),
                     "value": phases.lr_phase(params, sol, lv, cfg.t), "tolerance": None, "pass": None})
    return rows


def grid_points(cfg: RunConfig):
    omegas = [cfg.omega] if cfg.grid_omega is None else cfg.grid_omega
    Gs = [cfg.G] if cfg.grid_G is None else cfg.grid_G
    seen, points = set(), []
    for w in omegas:
        for g in Gs:
            key = (float(w), float(g))
            if key in seen:
                warnings.warn(f"duplicate grid point omega={w}, G={g} dropped", stacklevel=2)
                print(f"warning: duplicate grid point omega={w}, G={g} dropped", file=sys.stderr)
                continue
            seen.add(key)
            points.append(key)
    return points


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.grid_omega is None and cfg.grid_G is None:
        raise ConfigError("sweep needs grid_omega and/or grid_G")
    points = grid_points(cfg)
    if not points:
        raise ConfigError("sweep grid is empty")
    chunks = _run_points(lambda p: _sweep_point(cfg, p), points, cfg.threads)
    rows = [r for chunk in chunks for r in chunk]
    ok = all(r["pass"] for r in rows if r["kind"] == "check")
    emit(cfg, SWEEP_COLUMNS, rows, {"status": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "berry": cmd_berry, "evolve": cmd_evolve, "sweep": cmd_sweep}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()] if text.strip() else []


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its fields")
    common.add_argument("--Omega", type=float)
    common.add_argument("--G", type=float)
    common.add_argument("--omega", type=float)
    common.add_argument("--branch", choices=["minus", "plus"])
    common.add_argument("--sector", help="even, odd or bargmann:<k>")
    common.add_argument("--dim", type=int)
    common.add_argument("--interior", type=int)
    common.add_argument("--levels", type=_ints, help="comma-separated oscillator levels n")
    common.add_argument("--t", type=float, help="evaluation time for R-based checks")
    common.add_argument("--quad-steps", dest="quad_steps", type=int)
    common.add_argument("--ode-steps", dest="ode_steps", type=int, help="RK4 steps per driving period")
    common.add_argument("--periods", type=float)
    common.add_argument("--samples", type=int, help="number of output times for evolve")
    common.add_argument("--perturb-eta", dest="perturb_eta", type=float)
    common.add_argument("--sweep-param", dest="sweep_param", choices=["omega", "G"])
    common.add_argument("--sweep-values", dest="sweep_values", type=_floats)
    common.add_argument("--grid-omega", dest="grid_omega", type=_floats)
    common.add_argument("--grid-G", dest="grid_G", type=_floats)
    common.add_argument("--threads", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--timing", action="store_true", help="print elapsed time to stderr")

    parser = argparse.ArgumentParser(prog="su11pt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = set(RunConfig.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **data)
    over = {k: v for k, v in vars(args).items()
            if k in RunConfig.__dataclass_fields__ and v is not None}
    return replace(cfg, **over)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = load_config(args).validate()
        code = COMMANDS[args.command](cfg)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, ArithmeticError) as exc:
        diag = getattr(exc, "diagnostics", {})
        print(f"numeric error: {exc} {diag if diag else ''}".rstrip(), file=sys.stderr)
        return EXIT_NUMERIC
    except SU11Error as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.timing:
        print(f"elapsed {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
