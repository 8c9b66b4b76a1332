"""Command-line front end.

Every subcommand reads a JSON config (``--config``), merges it over built-in
defaults, then applies flag overrides: flags > file > defaults.  Unknown keys
are rejected.  Outputs go to ``--out`` (default ``out``) as JSON and CSV with
17 significant digits, so files round-trip exactly.

Exit codes: 0 success, 1 verification failure, 2 invalid input.
Set ``PERSUASION_LOG`` (e.g. ``INFO``) to change the log level.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from persuasion.exceptions import DomainError, IncompatibleError
from persuasion.multidim import MultiDimSolution, MultiParams, solve_multidim
from persuasion.obedience import ode_residual, reservation_loss, verify_obedience
from persuasion.policy import PolicySolution, Regime, comparative_statics_report, solve, solve_deterministic
from persuasion.reporting import VariancePath, build_reporting_function, is_bayes_plausible
from persuasion.simulation import SimConfig, simulate_policy
from persuasion.state_process import ProcessParams, sample_path
from persuasion.two_period import TwoPeriodParams, solve_two_period

log = logging.getLogger("persuasion")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# Reference instance; the "large" initial variance stands in for a non-binding constraint.
_BASE = {"kappa": -0.5, "sigma": 2.0, "r": 3.0, "mu0": 0.0, "beta": 3.0}
LARGE_VAR = 1e6

DEFAULTS: dict[str, dict] = {
    "solve": {**_BASE, "sigma0_sq": 2.0, "grid_step": 1e-3, "t_max": None, "out": "out"},
    "solve-multi": {
        "kappa": [-0.75, -0.25, 0.25],
        "sigma": [2.0, 2.0, 2.0],
        "sigma0_sq": [4.0, 100.0, 4.0],
        "r": 3.0,
        "beta": [5.0, 0.0, 0.0],
        "mu0": None,
        "grid_step": 1e-3,
        "t_max": None,
        "out": "out",
    },
    "two-period": {"beta": 1.0, "delta": 0.25, "rho": 1.0, "sigma": 0.2, "sigma1_sq": 1.0, "out": "out"},
    "verify": {"solution": None, "path_csv": None, "tol": 1e-6, "grid_step": None, "t_max": None, "out": "out"},
    "simulate": {
        **_BASE,
        "sigma0_sq": 2.0,
        "solution": None,
        "reporting_solution": None,
        "paths": 10_000,
        "seed": 0,
        "grid_step": 1e-3,
        "horizon": None,
        "n_deviation_times": 50,
        "trace": 0,
        "out": "out",
    },
    "sweep": {
        **_BASE,
        "sigma0_sq": LARGE_VAR,
        "axis": "beta",
        "values": None,
        "start": 1.5,
        "stop": 4.0,
        "step": 0.5,
        "grid_step": 0.05,
        "t_max": 1.0,
        "tol": 1e-12,
        "out": "out",
    },
    "figure": {"which": ["delayed_report", "policy", "reporting", "multidim"], "seed": 0, "grid_step": 1e-3, "out": "out"},
}


class ConfigError(DomainError):
    pass


# ---------------------------------------------------------------- config / io


def load_config(command: str, path: str | None, flags: dict) -> dict:
    """Merge defaults, the JSON file at ``path`` and explicit flag values."""
    cfg = dict(DEFAULTS[command])
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        cfg.update(_checked(command, data))
    cfg.update(_checked(command, {k: v for k, v in flags.items() if v is not None}))
    return cfg


def _checked(command: str, data: dict) -> dict:
    unknown = sorted(set(data) - set(DEFAULTS[command]))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    return data


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.17g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def _grid(t_max: float, step: float, extra=()) -> np.ndarray:
    if not step > 0:
        raise ConfigError("grid_step must be positive")
    n = max(1, int(round(t_max / step)))
    g = np.linspace(0.0, n * step, n + 1)
    extra = [e for e in extra if 0 <= e <= g[-1]]
    return np.unique(np.concatenate([g, extra]))


def _process(cfg: dict) -> ProcessParams:
    return ProcessParams(
        kappa=float(cfg["kappa"]), sigma=float(cfg["sigma"]), r=float(cfg["r"]),
        mu0=float(cfg["mu0"]), sigma0_sq=float(cfg["sigma0_sq"]),
    )


def _solve_1d(cfg: dict) -> PolicySolution:
    p = _process(cfg)
    return solve_deterministic(p, float(cfg["beta"])) if p.sigma == 0 else solve(p, float(cfg["beta"]))


def _default_t_max(sol) -> float:
    if isinstance(sol, PolicySolution) and sol.deterministic:
        return sol.t0 + 5.0 / sol.params.price
    return max(sol.T, 0.0) + 1.0


# ---------------------------------------------------------------- commands


def cmd_solve(cfg: dict) -> int:
    sol = _solve_1d(cfg)
    out = Path(cfg["out"])
    t_max = cfg["t_max"] if cfg["t_max"] is not None else _default_t_max(sol)
    grid = _grid(t_max, cfg["grid_step"], [sol.t0, sol.T])
    write_json(out / "solution.json", sol.to_dict())
    write_csv(out / "path.csv", ["t", "b", "v"], zip(grid, sol.bias(grid), sol.variance(grid)))
    log.info("solve: regime=%s T=%.10g t0=%.10g", sol.regime.value, sol.T, sol.t0)
    print(json.dumps(_jsonable(sol.to_dict()), sort_keys=True))
    return EXIT_OK


def _multi_params(cfg: dict) -> tuple[MultiParams, np.ndarray]:
    return MultiParams.sorted(cfg["kappa"], cfg["sigma"], cfg["sigma0_sq"], float(cfg["r"]), cfg["beta"], cfg["mu0"])


def cmd_solve_multi(cfg: dict) -> int:
    p, perm = _multi_params(cfg)
    sol = solve_multidim(p, permutation=None if np.all(perm == np.arange(p.n)) else perm)
    out = Path(cfg["out"])
    t_max = cfg["t_max"] if cfg["t_max"] is not None else _default_t_max(sol)
    grid = _grid(t_max, cfg["grid_step"], sol.breakpoints)
    rows = []
    for t in grid:
        bn = sol.bias_norm(float(t))
        rows.append([t, bn, *sol.variances(float(t))])
    write_json(out / "solution.json", sol.to_dict())
    write_csv(out / "path.csv", ["t", "b_norm", *[f"v{i + 1}" for i in range(p.n)]], rows)
    print(json.dumps(_jsonable({"i0": sol.i0 + 1, "times": sol.times, "sigma_hat": sol.sigma_hat}), sort_keys=True))
    return EXIT_OK


def cmd_two_period(cfg: dict) -> int:
    tp = TwoPeriodParams(*(float(cfg[k]) for k in ("beta", "delta", "rho", "sigma", "sigma1_sq")))
    sol = solve_two_period(tp)
    write_json(Path(cfg["out"]) / "two_period.json", sol.to_dict())
    print(json.dumps(_jsonable(sol.to_dict()), sort_keys=True))
    return EXIT_OK


def _load_solution(path):
    if path is None:
        raise ConfigError("a solution file is required (config key 'solution')")
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read solution {path}: {exc}") from exc
    try:
        if "i0" in doc:
            return MultiDimSolution.from_dict(doc)
        return PolicySolution.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed solution file {path}: {exc}") from exc


def _component_params(sol) -> list[tuple[int, ProcessParams]]:
    if isinstance(sol, PolicySolution):
        return [(0, sol.params)]
    p = sol.params
    return [
        (i, ProcessParams(kappa=p.kappa[i], sigma=p.sigma[i], r=p.r, sigma0_sq=p.sigma0_sq[i]))
        for i in range(p.n)
    ]


def _variance_columns(sol, t):
    t = np.asarray(t, dtype=float)
    if isinstance(sol, PolicySolution):
        return np.asarray(sol.variance(t), dtype=float)[:, None]
    return np.asarray(sol.variances(t), dtype=float)


def _bias_norm(sol, t):
    if isinstance(sol, PolicySolution):
        return np.abs(np.asarray(sol.bias(t), dtype=float))
    return np.asarray(sol.bias_norm(t), dtype=float)


def cmd_verify(cfg: dict) -> int:
    sol = _load_solution(cfg["solution"])
    tol = float(cfg["tol"])
    pp = sol.path_pair()
    T = sol.T
    t_max = cfg["t_max"] if cfg["t_max"] is not None else _default_t_max(sol)
    if cfg["grid_step"] is not None:
        grid = _grid(t_max, cfg["grid_step"])
    else:
        grid = np.linspace(0.0, t_max, 1000)
    failures: list[str] = []
    report: dict = {"tol": tol}

    # obedience (closed-form paths, optionally against sampled variances)
    v_cols = _variance_columns(sol, grid)
    sample = None
    if cfg["path_csv"] is not None:
        header, data = read_csv(Path(cfg["path_csv"]))
        if data.ndim != 2 or data.shape[1] != 2 + v_cols.shape[1]:
            raise ConfigError(f"path CSV has unexpected columns {header}")
        sample = data
        grid = data[:, 0]
        v_cols = data[:, 2:]
    ob = verify_obedience(pp, sol.params, grid, tol=tol)
    if sample is not None:
        # continuation from the closed form, reservation from the sampled variances
        res_closed = np.array([reservation_loss(pp.v(t), sol.params) for t in grid])
        res_sample = np.array([reservation_loss(v, sol.params) for v in v_cols])
        ob.excess = ob.excess + res_closed - res_sample
    worst = ob.worst_time
    report["obedience"] = {
        "max_excess": ob.max_excess,
        "worst_t": worst,
        "min_slack": float(-np.max(ob.excess)) if sol.regime is Regime.FIRST_BEST else None,
        "binding_everywhere": ob.all_binding,
    }
    if ob.max_excess > tol:
        failures.append(f"obedience violated at t={worst!r} (excess {ob.max_excess:.3g})")

    # binding-obedience ODE on the open transition phases
    max_res, res_t = 0.0, None
    if sol.regime is Regime.CONSTRAINED and math.isfinite(T) and T > 0:
        edges = [0.0, *sol.breakpoints]
        for a, b in zip(edges[:-1], edges[1:]):
            if b - a < 1e-4:
                continue
            for t in np.linspace(a, b, 52)[1:-1]:
                try:
                    val = abs(ode_residual(pp, sol.params, float(t)))
                except DomainError:
                    continue
                if val > max_res:
                    max_res, res_t = val, float(t)
    report["ode_residual"] = {"max": max_res, "worst_t": res_t}
    if max_res > tol:
        failures.append(f"ODE residual {max_res:.3g} at t={res_t!r}")

    # Bayes plausibility per component
    plaus = []
    for i, p_i in _component_params(sol):
        if sample is not None:
            vp = VariancePath.from_grid(grid, v_cols[:, i])
        else:
            vp = VariancePath.from_function(lambda t, i=i: _variance_columns(sol, np.atleast_1d(t))[:, i], sol.breakpoints)
        try:
            verdict = is_bayes_plausible(vp, p_i, grid, tol=1e-9)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        plaus.append(verdict.to_dict())
        if not verdict.ok:
            f = verdict.first
            at = f.s if f.s is not None else f.t
            failures.append(f"component {i + 1} not Bayes plausible: {f.kind} at t={at!r}")
    report["plausibility"] = plaus

    if sample is not None:
        gap_v = np.abs(sample[:, 2:] - _variance_columns(sol, grid)).max(axis=1)
        gap_b = np.abs(sample[:, 1] - _bias_norm(sol, grid))
        gap = np.maximum(gap_v, gap_b)
        k = int(np.argmax(gap))
        report["sample_mismatch"] = {"max": float(gap[k]), "worst_t": float(grid[k])}
        if gap[k] > tol:
            failures.append(f"sampled path departs from the solution at t={float(grid[k])!r} (gap {gap[k]:.3g})")

    report["pass"] = not failures
    report["failures"] = failures
    write_json(Path(cfg["out"]) / "verify.json", report)
    for msg in failures:
        print(f"FAIL: {msg}", file=sys.stderr)
    print("verify: " + ("pass" if not failures else "fail"))
    return EXIT_OK if not failures else EXIT_FAIL


def cmd_simulate(cfg: dict) -> int:
    sol = _load_solution(cfg["solution"]) if cfg["solution"] is not None else _solve_1d(cfg)
    if not isinstance(sol, PolicySolution):
        raise ConfigError("simulation supports one-dimensional solutions only")
    src = _load_solution(cfg["reporting_solution"]) if cfg["reporting_solution"] is not None else sol
    if not isinstance(src, PolicySolution):
        raise ConfigError("reporting_solution must be one-dimensional")
    phi = build_reporting_function(VariancePath.from_solution(src), src.params)
    sim_cfg = SimConfig(
        n_paths=int(cfg["paths"]),
        dt=float(cfg["grid_step"]),
        horizon=cfg["horizon"],
        base_seed=int(cfg["seed"]),
        n_deviation_times=int(cfg["n_deviation_times"]),
        trace_paths=int(cfg["trace"]),
    )
    try:
        res = simulate_policy(sol, phi, sim_cfg)
    except IncompatibleError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(cfg["out"])
    write_json(out / "simulation.json", res.to_dict())
    if res.trace is not None:
        tr = res.trace
        rows = []
        for j in range(tr["theta"].shape[0]):
            for k, t in enumerate(tr["t"]):
                rows.append([j, t, tr["theta"][j, k], tr["phi"][k], tr["action"][j, k],
                             tr["receiver_flow"][j, k], tr["sender_flow"][j, k]])
        write_csv(out / "trace.csv", ["path", "t", "theta", "phi", "action", "receiver_flow", "sender_flow"], rows)
    bad = [d.t_dev for d in res.deviation_tests if d.verdict == "profitable deviation"]
    print(f"simulate: sender {res.sender_loss.mean:.6g} (analytic {res.sender_loss_analytic:.6g}), "
          f"receiver {res.receiver_loss.mean:.6g} (analytic {res.receiver_loss_analytic:.6g}), "
          f"profitable deviations: {len(bad)}")
    return EXIT_OK if not bad else EXIT_FAIL


# expected directions of (bias, variance) when the swept parameter increases
_EXPECTED = {
    "beta": ("increasing", "increasing"),
    "sigma": ("increasing", "decreasing"),
    "r": ("decreasing", None),
    "kappa": ("increasing", None),
}


def cmd_sweep(cfg: dict) -> int:
    axis = cfg["axis"]
    if axis not in _EXPECTED:
        raise ConfigError(f"axis must be one of {sorted(_EXPECTED)}")
    if cfg["values"] is not None:
        values = [float(x) for x in cfg["values"]]
    else:
        start, stop, step = float(cfg["start"]), float(cfg["stop"]), float(cfg["step"])
        if step <= 0 or stop < start:
            raise ConfigError("need step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9))
        values = [start + k * step for k in range(n + 1)]
    if not values:
        raise ConfigError("empty sweep")
    sols = [_solve_1d({**cfg, axis: v}) for v in values]
    grid = _grid(float(cfg["t_max"]), float(cfg["grid_step"]))
    header = ["param", "regime", "regime_change", "initial_binding", "T"]
    header += [f"b@{t:.6g}" for t in grid] + [f"v@{t:.6g}" for t in grid]
    rows = []
    prev = None
    for v, s in zip(values, sols):
        change = prev is not None and s.regime is not prev
        rows.append([v, s.regime.value, change, s.t0 > 0, s.T, *s.bias(grid), *s.variance(grid)])
        prev = s.regime
    out = Path(cfg["out"])
    write_csv(out / f"sweep_{axis}.csv", header, rows)

    fine = np.linspace(0.0, max([s.T for s in sols if math.isfinite(s.T)] + [0.0]) + 1.0, 2001)
    want_b, want_v = _EXPECTED[axis]
    pairs, ok = [], True
    for (v_lo, lo), (v_hi, hi) in zip(zip(values, sols), zip(values[1:], sols[1:])):
        checked = lo.regime is Regime.CONSTRAINED and hi.regime is Regime.CONSTRAINED and lo.t0 == 0 and hi.t0 == 0
        order = comparative_statics_report(lo, hi, fine, tol=float(cfg["tol"]))
        good = True
        if checked:
            good = order.bias == want_b and (want_v is None or order.variance == want_v)
        ok &= good
        pairs.append({"from": v_lo, "to": v_hi, "checked": checked, "consistent": good, **order.to_dict()})
    write_json(out / f"sweep_{axis}.json", {"axis": axis, "expected": {"bias": want_b, "variance": want_v},
                                             "monotone": ok, "pairs": pairs})
    print(f"sweep {axis}: {len(values)} rows, monotone={ok}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_figure(cfg: dict) -> int:
    out = Path(cfg["out"])
    step = float(cfg["grid_step"])
    which = cfg["which"]
    known = {"delayed_report", "policy", "reporting", "multidim"}
    bad = sorted(set(which) - known)
    if bad:
        raise ConfigError(f"unknown figure dataset(s): {', '.join(bad)}")
    p_large = ProcessParams(kappa=-0.5, sigma=2.0, r=3.0, sigma0_sq=LARGE_VAR)
    meta = {}
    if "delayed_report" in which:
        grid = _grid(2.1, step)
        path = sample_path(p_large.replace(sigma0_sq=1.0), grid, int(cfg["seed"]))
        phi_t0 = 0.5
        k0 = int(np.searchsorted(grid, phi_t0))
        reported = path.values[k0]
        cond = np.where(grid >= phi_t0, np.exp(p_large.kappa * (grid - phi_t0)) * reported, np.nan)
        write_csv(out / "delayed_report.csv", ["t", "theta", "conditional_mean"], zip(grid, path.values, cond))
        meta["delayed_report"] = {"phi_t0": phi_t0, "report": float(reported)}
    if "policy" in which or "reporting" in which:
        sol = solve(p_large, 3.0)
        shifted = solve(p_large.replace(sigma0_sq=2.0), 3.0)
        grid = _grid(0.35, step, [sol.T])
        if "policy" in which:
            write_csv(out / "policy.csv", ["t", "b", "v"], zip(grid, sol.bias(grid), sol.variance(grid)))
            meta["policy"] = {"T": sol.T, "t0_when_sigma0_sq_is_2": shifted.t0,
                              "b_at_t0": float(sol.bias(shifted.t0))}
        if "reporting" in which:
            # the plotted prehistory piece corresponds to an initial variance of 4
            sol4 = solve(p_large.replace(sigma0_sq=4.0), 3.0)
            phi = build_reporting_function(VariancePath.from_solution(sol4), sol4.params)
            vals, _ = phi.evaluate(grid)
            cases = [phi.case(float(t)) for t in grid]
            write_csv(out / "reporting.csv", ["t", "phi", "case"], zip(grid, vals, cases))
            meta["reporting"] = {"pieces": phi.to_dict()["pieces"]}
    if "multidim" in which:
        cfg_m = DEFAULTS["solve-multi"]
        p, _ = _multi_params(cfg_m)
        sol_m = solve_multidim(p)
        grid = _grid(0.55, step, sol_m.breakpoints)
        rows = [[t, sol_m.bias_norm(float(t)), *sol_m.variances(float(t))] for t in grid]
        write_csv(out / "multidim.csv", ["t", "b_norm", "v1", "v2", "v3"], rows)
        meta["multidim"] = sol_m.to_dict()
    write_json(out / "figures.json", meta)
    print(f"figure: wrote {', '.join(sorted(which))} to {out}")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "solve-multi": cmd_solve_multi,
    "two-period": cmd_two_period,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
}

_HELP = {
    "solve": "solve the one-dimensional problem; writes solution.json and path.csv (t, b, v)",
    "solve-multi": "solve the multidimensional problem; writes solution.json and path.csv (t, b_norm, v1..vn)",
    "two-period": "closed-form two-period solution",
    "verify": "check obedience, the binding ODE and Bayes plausibility of a solution file",
    "simulate": "Monte Carlo losses and grim-trigger deviation tests",
    "sweep": "comparative-statics sweep over one parameter",
    "figure": "emit the datasets behind the policy, reporting and multidimensional figures",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persuasion",
        description="Dynamic bias/precision persuasion solver. "
        "Settings come from built-in defaults, then --config, then flags (flags win).",
        epilog="Exit codes: 0 success, 1 verification failure, 2 invalid input. "
        "Env var PERSUASION_LOG sets the log level.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=_HELP[name], description=_HELP[name])
        sp.add_argument("--config", metavar="PATH", help="JSON config file")
        sp.add_argument("--out", metavar="DIR", help="output directory")
        sp.add_argument("--seed", type=int, metavar="N")
        sp.add_argument("--grid-step", dest="grid_step", type=float, metavar="DT")
        sp.add_argument("--tol", type=float, metavar="X")
        sp.add_argument("--paths", type=int, metavar="N")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                        help="override any config key, e.g. --set beta=3.5")
        if name in ("verify", "simulate"):
            sp.add_argument("--solution", metavar="PATH", help="solution JSON written by solve")
        if name == "verify":
            sp.add_argument("--path-csv", dest="path_csv", metavar="PATH", help="sampled path CSV to check")
    return parser


def _flag_values(command: str, args) -> dict:
    flags = {}
    for attr in ("out", "seed", "grid_step", "tol", "paths", "solution", "path_csv"):
        val = getattr(args, attr, None)
        if val is None:
            continue
        if attr not in DEFAULTS[command]:
            raise ConfigError(f"--{attr.replace('_', '-')} does not apply to {command}")
        flags[attr] = val
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=JSON, got {item!r}")
        try:
            flags[key.replace("-", "_")] = json.loads(raw)
        except json.JSONDecodeError:
            flags[key.replace("-", "_")] = raw
    return flags


def main(argv=None) -> int:
    level = os.environ.get("PERSUASION_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, _flag_values(args.command, args))
        return COMMANDS[args.command](cfg)
    except (DomainError, TypeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
