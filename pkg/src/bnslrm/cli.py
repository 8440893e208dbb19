"""Command-line driver: validate a configuration or run a strike sweep to CSV/SVG."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AssumptionError, GridRejectedError
from .levy_kernel import LevyKernel
from .lrm import strike_sweep
from .model import BnsModel, check_assumption, load_params_file, preset
from .paths import McConfig
from .quadrature import DEFAULT_TOLERANCE, build_grid, load_grid_file
from .report import plot_csv, plot_rows, read_csv, sweep_rows, write_csv, write_manifest

log = logging.getLogger("bnslrm")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ASSUMPTION = 2
EXIT_GRID = 3
EXIT_IO = 4


@dataclass
class RunConfig:
    name: str
    params: object
    times: tuple
    strikes: np.ndarray
    grid_spec: object
    grid_tolerance: float = DEFAULT_TOLERANCE
    mc: McConfig = field(default_factory=McConfig)
    out_dir: Path = Path("out")
    plot: bool = True


def parse_strikes(text, s_bar):
    """``LO:HI:STEP``; a trailing ``S`` on a value means a multiple of ``s_bar``."""
    def value(tok):
        tok = tok.strip()
        if tok[-1:] in ("S", "s"):
            return float(tok[:-1] or 1.0) * s_bar
        return float(tok)

    parts = text.split(":")
    if len(parts) == 1:
        return np.array([value(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"strikes must be LO:HI:STEP, got {text!r}")
    lo, hi, step = (value(p) for p in parts)
    if not (step > 0 and hi >= lo > 0):
        raise ValueError(f"bad strike range {text!r}")
    count = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


def build_parser():
    p = argparse.ArgumentParser(prog="bnslrm", description=__doc__)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=["nv", "scho", "NV", "Scho"], default=None)
    src.add_argument("--params", type=Path, help="key = value parameter file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter (alpha, rho, lambda, a, b, S0, sigma0_sq)")
    p.add_argument("--t", default="0.1,0.5,0.9", help="comma-separated evaluation times")
    p.add_argument("--T", type=float, default=None, help="maturity (default 1, or from params file)")
    p.add_argument("--strikes", default="0.5S:1.5S:0.01S")
    p.add_argument("--grid", default=None, help="nv | scho | nv-reduced | scho-reduced | FILE")
    p.add_argument("--grid-tolerance", type=float, default=None)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=McConfig.master_seed)
    p.add_argument("--epsilon", type=float, default=McConfig.epsilon)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=McConfig.batch_size)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--plot", choices=["on", "off"], default="on")
    p.add_argument("--plot-from", type=Path, metavar="CSV", help="only regenerate plots from a CSV")
    p.add_argument("--validate", action="store_true", help="dry run: checks and work estimate only")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


_SET_KEYS = {"alpha": "alpha", "rho": "rho", "lambda": "lam", "a": "a", "b": "b",
             "s0": "s_bar", "sigma0_sq": "sigma_bar_sq"}


def config_from_args(args):
    if args.params is not None:
        params = load_params_file(args.params)
        name = args.params.stem
    else:
        name = {"nv": "NV", "scho": "Scho"}[(args.preset or "nv").lower()]
        params = preset(name)
    overrides = {}
    for item in args.set:
        key, _, value = item.partition("=")
        if key.strip().lower() not in _SET_KEYS:
            raise ValueError(f"cannot override {key!r}")
        overrides[_SET_KEYS[key.strip().lower()]] = float(value)
    if args.T is not None:
        overrides["horizon_T"] = args.T
    if overrides:
        params = params.at(**overrides)
    times = tuple(float(x) for x in args.t.split(",") if x.strip())
    strikes = parse_strikes(args.strikes, params.s_bar)
    tolerance = args.grid_tolerance
    grid_spec = args.grid or (name if name in ("NV", "Scho") else "NV")
    if Path(grid_spec).is_file():
        grid_spec, file_tol = load_grid_file(grid_spec)
        tolerance = tolerance if tolerance is not None else file_tol
    if tolerance is None:
        tolerance = 1e-4 if str(grid_spec).lower().endswith("-reduced") else DEFAULT_TOLERANCE
    mc = McConfig(step_h=args.step, n_paths=args.paths, master_seed=args.seed, epsilon=args.epsilon,
                  batch_size=args.batch_size, workers=args.workers)
    return RunConfig(name, params, times, strikes, grid_spec, tolerance, mc, args.out, args.plot == "on")


def validate(cfg):
    """Dry run; returns ``(ok, report_dict)`` without simulating anything."""
    report = {"name": cfg.name, "params": asdict(cfg.params)}
    assumption = check_assumption(cfg.params)
    report["assumption"] = {
        "ok": assumption.ok, "decay_lhs": assumption.decay_lhs, "decay_rhs": assumption.decay_rhs,
        "drift_lhs": assumption.drift_lhs, "drift_rhs": assumption.drift_rhs,
        "messages": list(assumption.messages),
    }
    ok = assumption.ok
    p = cfg.params
    kernel = LevyKernel.from_params(p.a, p.b, p.lam, p.rho, cfg.mc.epsilon)
    report["derived"] = derived_constants(kernel, p.alpha)
    try:
        grid = build_grid(kernel, cfg.grid_spec, tolerance=None)
        grid_ok = grid.c1_error <= cfg.grid_tolerance
        report["grid"] = {"name": grid.name, "nodes": grid.size, "c1_approx": grid.c1_approx,
                          "c1_error": grid.c1_error, "tolerance": cfg.grid_tolerance, "ok": grid_ok}
        n_shifts = 1 + (grid.size if p.rho != 0.0 else 0)
    except (KeyError, ValueError) as exc:
        grid_ok = False
        report["grid"] = {"ok": False, "error": str(exc)}
        n_shifts = 1
    ok = ok and grid_ok
    steps = 0
    for t in cfg.times:
        try:
            steps += cfg.mc.n_steps(t, p.horizon_T)
        except ValueError as exc:
            ok = False
            report.setdefault("errors", []).append(str(exc))
    report["work"] = {"shifts": n_shifts, "paths": cfg.mc.n_paths, "steps": steps,
                      "path_steps": n_shifts * cfg.mc.n_paths * steps}
    report["ok"] = ok
    return ok, report


def derived_constants(kernel, alpha):
    return {"c1": kernel.c1, "c2": kernel.c2, "mu": alpha - kernel.c1, "mu_eps": kernel.mu_eps,
            "gamma_eps": kernel.gamma_eps, "rate_cp1_eps": kernel.rate_cp1_eps,
            "rate_cp2": kernel.rate_cp2, "epsilon": kernel.epsilon}


def format_validation(report):
    a = report["assumption"]
    lines = [f"[{'PASS' if report['ok'] else 'FAIL'}] {report['name']}",
             f"  assumption: {'pass' if a['ok'] else 'FAIL'}  b^2/2={a['decay_lhs']:.6g} vs {a['decay_rhs']:.6g};"
             f"  alpha/(e^(-lam T) sigma0^2 + C2)={a['drift_lhs']:.6g} vs -1"]
    lines += [f"  note: {m}" for m in a["messages"]]
    g = report["grid"]
    if "c1_error" in g:
        lines.append(f"  grid {g['name']}: N={g['nodes']} c1_error={g['c1_error']:.3e} "
                     f"(tolerance {g['tolerance']:.1e}) {'ok' if g['ok'] else 'REJECTED'}")
    else:
        lines.append(f"  grid: {g.get('error')}")
    d = report["derived"]
    lines.append(f"  C1={d['c1']:.6e}  C2={d['c2']:.6e}  mu={d['mu']:.6e}")
    w = report["work"]
    lines.append(f"  work: {w['shifts']} shifts x {w['paths']} paths x {w['steps']} steps = {w['path_steps']:.3e}")
    lines += [f"  error: {e}" for e in report.get("errors", [])]
    return "\n".join(lines)


def run(cfg):
    """Run the sweep and write CSV, manifest and (optionally) plots. Returns an exit status."""
    try:
        model = BnsModel.from_params(cfg.params.at(cfg.times[0]), epsilon=cfg.mc.epsilon)
    except AssumptionError as exc:
        log.error("assumption violated; aborting\n%s", exc)
        return EXIT_ASSUMPTION
    try:
        grid = build_grid(model.kernel, cfg.grid_spec, tolerance=cfg.grid_tolerance)
    except GridRejectedError as exc:
        log.error("grid rejected: %s", exc)
        return EXIT_GRID
    log.info("%s: grid %s (N=%d, c1_error=%.3e), %d strikes x %d times, L=%d",
             cfg.name, grid.name, grid.size, grid.c1_error, len(cfg.strikes), len(cfg.times), cfg.mc.n_paths)
    sweep = strike_sweep(model, cfg.mc, grid, cfg.strikes, cfg.times)
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = write_csv(cfg.out_dir / f"lrm_{cfg.name}.csv", sweep_rows(cfg.name, sweep, cfg.mc))
        write_manifest(cfg.out_dir / f"manifest_{cfg.name}.json", manifest(cfg, model, grid, sweep))
        if cfg.plot:
            plot_rows(read_csv(csv_path), cfg.out_dir)
    except OSError as exc:
        log.error("could not write output: %s", exc)
        return EXIT_IO
    log.info("wrote %s", csv_path)
    return EXIT_OK


def manifest(cfg, model, grid, sweep):
    return {
        "version": __version__,
        "name": cfg.name,
        "params": asdict(cfg.params),
        "times": list(cfg.times),
        "strikes": [float(k) for k in cfg.strikes],
        "grid": {"name": grid.name, "nodes": grid.size, "head_integral": grid.head_integral,
                 "c1_approx": grid.c1_approx, "c1_error": grid.c1_error, "tolerance": cfg.grid_tolerance},
        # execution-only settings (workers, batch_size) do not change results and are not recorded
        "mc": {k: v for k, v in asdict(cfg.mc).items() if k not in ("workers", "batch_size")},
        "derived": derived_constants(model.kernel, model.alpha),
        "weights": {repr(t): asdict(d) for t, d in sweep.weights.items()},
    }


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    if args.plot_from is not None:
        try:
            for path in plot_csv(args.plot_from, args.out if args.out != Path("out") else None):
                log.info("wrote %s", path)
        except OSError as exc:
            log.error("could not regenerate plots: %s", exc)
            return EXIT_IO
        return EXIT_OK
    try:
        cfg = config_from_args(args)
    except (ValueError, KeyError, OSError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    if args.validate:
        ok, report = validate(cfg)
        print(format_validation(report))
        return EXIT_OK if ok else EXIT_VALIDATION
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
