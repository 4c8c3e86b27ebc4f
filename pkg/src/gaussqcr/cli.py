"""Command-line front end.

Usage::

    gaussqcr <command> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]

Commands: bound, oracle-check, simulate, allocate, sweep, modes.
Exit codes: 0 success, 2 config error, 3 model degeneracy, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .allocation import SqueezerBank, optimize_allocation, random_network_audit
from .errors import ConfigError, NoInformation, ZeroDetectionMode, ZeroMeanField
from .fisher import analyze, qfi_full
from .homodyne import HomodyneConfig, run_experiment
from .models import BUILTIN_FAMILIES, DEFAULT_STEP, differentiate, make_model
from .modes import Grid, build_detection_basis, hermite_gauss, mean_field_mode
from .oracle import qfi_from_overlap, qfi_from_overlap_path, random_path

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_VERIFY = 0, 2, 3, 4
CONFIG_VERSION = 1
THREADS_ENV = "GAUSSQCR_THREADS"

MODEL_KEYS = {"version", "model", "params", "grid"}
DERIV_KEYS = {"derivatives", "h", "richardson"}
COMMAND_KEYS = {
    "bound": MODEL_KEYS | DERIV_KEYS | {"q"},
    "sweep": MODEL_KEYS | DERIV_KEYS | {"q", "sweep"},
    "modes": MODEL_KEYS | DERIV_KEYS | {"basis_size"},
    "oracle-check": MODEL_KEYS | {"random_cases", "max_modes", "seed", "tolerance"},
    "simulate": MODEL_KEYS | DERIV_KEYS | {"lo", "samples", "repetitions", "seed", "theta_true", "sweep"},
    "allocate": {"version", "bank_db", "extra_db", "trials", "seed", "detection_index"},
}
FISHER_SWEEP_COLUMNS = [
    "model", "param", "value", "N", "Q", "i_mean_term", "i_cov_term", "i_full",
    "gamma_inv_11", "bound_full", "bound_linearized",
]


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def load_config(path, command: str) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in config: {exc}") from exc
    _check_keys(cfg, COMMAND_KEYS[command], "config")
    if cfg.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {cfg['version']!r}")
    return cfg


def grid_from_config(cfg: dict) -> Grid:
    g = cfg.get("grid", {})
    _check_keys(g, {"min", "max", "points"}, "grid")
    try:
        return Grid.uniform(float(g.get("min", -8.0)), float(g.get("max", 8.0)), int(g.get("points", 1024)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid: {exc}") from exc


def model_from_config(cfg: dict, **overrides):
    if "model" not in cfg:
        raise ConfigError("config needs a 'model' entry")
    if not isinstance(cfg.get("params", {}), dict):
        raise ConfigError("params must be a JSON object")
    params = dict(cfg.get("params", {}))
    params.update(overrides)
    if "sigma2" in overrides:
        params.pop("squeeze_db", None)
    return make_model(cfg["model"], params)


def _deriv_options(cfg):
    mode = cfg.get("derivatives", "numeric")
    if mode not in ("numeric", "analytic"):
        raise ConfigError("derivatives must be 'numeric' or 'analytic'")
    h = float(cfg.get("h", DEFAULT_STEP))
    if not h > 0:
        raise ConfigError("h must be positive")
    return {"analytic": mode == "analytic", "h": h, "richardson": bool(cfg.get("richardson", False))}


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_table(rows):
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {io.fmt(v)}")


def cmd_bound(args, cfg) -> int:
    grid = grid_from_config(cfg)
    family = model_from_config(cfg)
    q = int(cfg.get("q", 1))
    report = analyze(family, grid, q=q, **_deriv_options(cfg))
    data = {"model": family.name, **report.to_dict()}
    io.write_json(_out(args) / "bound.json", data)
    _print_table(
        [
            ("model", family.name),
            ("Q * N", q * (report.photon_number or 0.0)),
            ("mode-shape term 4|u'|^2", report.mode_shape_term),
            ("photon term (N'/N)^2", report.photon_term),
            ("gamma_inv_11", report.gamma_inv_11),
            ("i_mean_term", report.i_mean_term),
            ("i_cov_term", report.i_cov_term),
            ("i_full", report.i_full),
            ("bound_full", report.delta_theta_min),
            ("bound_linearized", report.bound_linearized),
        ]
    )
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    grid = grid_from_config(cfg)
    sweep = cfg.get("sweep")
    if sweep is None:
        raise ConfigError("sweep command needs a 'sweep' entry")
    _check_keys(sweep, {"param", "values"}, "sweep")
    param, values = sweep.get("param"), sweep.get("values", [])
    q = int(cfg.get("q", 1))
    rows = []
    for v in values:
        family = model_from_config(cfg, **{param: v})
        rep = analyze(family, grid, q=q, **_deriv_options(cfg))
        rows.append([family.name, param, v, rep.photon_number, q, rep.i_mean_term, rep.i_cov_term, rep.i_full,
                     rep.gamma_inv_11, rep.delta_theta_min, rep.bound_linearized])
    io.write_csv(_out(args) / "sweep.csv", FISHER_SWEEP_COLUMNS, rows)
    print(f"wrote {len(rows)} rows to {Path(args.out) / 'sweep.csv'}")
    return EXIT_OK


def cmd_modes(args, cfg) -> int:
    grid = grid_from_config(cfg)
    family = model_from_config(cfg)
    opts = _deriv_options(cfg)
    bundle = differentiate(family, grid, opts["h"], richardson=opts["richardson"], analytic=opts["analytic"])
    size = int(cfg.get("basis_size", 4))
    w = getattr(family, "w", 1.0)
    basis = build_detection_basis(bundle.a_bar_prime, size, waist=w)
    out = _out(args)
    io.write_basis(out / "detection_basis", basis)
    if bundle.a_bar.norm() > 1e-12:
        io.write_field_csv(out / "mean_field_mode.csv", mean_field_mode(bundle.a_bar))
    print(f"wrote {size} detection-basis modes to {out / 'detection_basis'}")
    return EXIT_OK


def cmd_oracle_check(args, cfg) -> int:
    grid = grid_from_config(cfg)
    tol = float(cfg.get("tolerance", 1e-4))
    names = list(BUILTIN_FAMILIES) if cfg.get("model", "all") == "all" else [cfg["model"]]
    rows, worst = [], (0.0, None)
    for name in names:
        params = cfg.get("params", {}) if name == cfg.get("model") else {}
        family = make_model(name, params)
        try:
            direct = analyze(family, grid, analytic=True).i_full
            overlap = qfi_from_overlap(family, grid)
        except NoInformation:
            rows.append([name, 0.0, 0.0, "skipped"])
            continue
        rel = abs(overlap - direct) / direct
        rows.append([name, direct, overlap, rel])
        worst = max(worst, (rel, name), key=lambda t: t[0])
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    n_random = int(cfg.get("random_cases", 50))
    max_modes = int(cfg.get("max_modes", 3))
    rng = np.random.default_rng(seed)
    for k in range(n_random):
        path = random_path(1 + k % max_modes, rng)
        mp, cp = path.derivatives()
        a, b = qfi_full(mp, path.base.cov, cp)
        overlap = qfi_from_overlap_path(path)
        rel = abs(overlap - (a + b)) / (a + b)
        rows.append([f"random-{k}", a + b, overlap, rel])
        worst = max(worst, (rel, f"random-{k}"), key=lambda t: t[0])
    io.write_csv(_out(args) / "oracle_check.csv", ["case_id", "i_fisher_direct", "i_fisher_overlap", "rel_err"], rows)
    if worst[0] < tol:
        print(f"oracle check passed: {len(rows)} cases, worst rel_err {worst[0]:.3e}")
        return EXIT_OK
    print(f"oracle check FAILED: worst case {worst[1]} rel_err {worst[0]:.3e}")
    return EXIT_VERIFY


def _lo_from_config(cfg, family, grid, seed) -> HomodyneConfig:
    lo = cfg.get("lo", {})
    _check_keys(lo, {"mode", "phase", "photons"}, "lo")
    choice = lo.get("mode", "detection")
    if choice == "detection":
        mode = None
    elif choice == "mean_field":
        mode = mean_field_mode(family.evaluate(0.0, grid).mean_field)
    elif isinstance(choice, dict) and set(choice) == {"hg"}:
        mode = hermite_gauss(int(choice["hg"]), getattr(family, "w", 1.0), 0.0, grid)
    else:
        raise ConfigError(f"bad lo.mode {choice!r}; use 'detection', 'mean_field' or {{'hg': n}}")
    try:
        return HomodyneConfig(
            lo_mode=mode,
            lo_photons=float(lo.get("photons", 1e8)),
            lo_phase=float(lo.get("phase", 0.0)),
            samples=int(cfg.get("samples", 100_000)),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _sweep_plot(path, xs, emp, qcr, param):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "gaussqcr"
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(xs, qcr, "-", label="QCR bound")
    ax.loglog(xs, emp, "o", label="homodyne (empirical)")
    ax.set_xlabel(param)
    ax.set_ylabel("single-shot delta theta")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_simulate(args, cfg) -> int:
    grid = grid_from_config(cfg)
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    reps = int(cfg.get("repetitions", 1))
    theta = float(cfg.get("theta_true", 0.0))
    opts = _deriv_options(cfg)
    out = _out(args)
    sweep = cfg.get("sweep")

    def one(family):
        lo = _lo_from_config(cfg, family, grid, seed)
        return run_experiment(family, theta, lo, reps, grid=grid, h=opts["h"], analytic=opts["analytic"],
                              threads=args.threads, keep_blocks=True)

    if sweep is None:
        report, rows = one(model_from_config(cfg))
        io.write_csv(out / "repetitions.csv", ["repetition", "samples", "mean_estimate", "std_estimate"],
                     [[r["repetition"], r["samples"], r["mean_estimate"], r["std_estimate"]] for r in rows])
        io.write_json(out / "summary.json", report.to_dict())
        if not report.sensitive:
            print("LO has no first-order sensitivity to theta: delta theta diverges")
        else:
            print(f"empirical delta theta {report.empirical_delta_theta:.6g}, QCR {report.qcr_delta_theta:.6g}, "
                  f"ratio {report.ratio:.5f}, bias {report.bias:.3g} (se {report.stderr:.3g})")
        return EXIT_OK

    _check_keys(sweep, {"param", "values"}, "sweep")
    param, values = sweep.get("param"), [float(v) for v in sweep.get("values", [])]
    if len(values) < 2:
        raise ConfigError("sweep needs at least two values")
    rows, summaries = [], []
    for v in values:
        report, _ = one(model_from_config(cfg, **{param: v}))
        rows.append([param, v, report.empirical_delta_theta, report.qcr_delta_theta, report.ratio, report.bias, report.stderr])
        summaries.append(report.to_dict())
    io.write_csv(out / "sweep.csv", ["param", "value", "empirical_delta_theta", "qcr_delta_theta", "ratio", "bias", "stderr"], rows)
    emp = np.array([r[2] for r in rows])
    qcr = np.array([r[3] for r in rows])
    slope = None
    if np.all(np.isfinite(emp)) and np.all(emp > 0):
        slope = float(np.polyfit(np.log(values), np.log(emp), 1)[0])
        _sweep_plot(out / "sweep.svg", values, emp, qcr, param)
    io.write_json(out / "summary.json", {"param": param, "loglog_slope": slope, "points": summaries})
    print(f"sweep over {param}: log-log slope {slope}")
    return EXIT_OK


def cmd_allocate(args, cfg) -> int:
    if "bank_db" not in cfg:
        raise ConfigError("allocate needs 'bank_db'")
    try:
        bank = SqueezerBank.from_db(cfg["bank_db"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    det = int(cfg.get("detection_index", 0))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    trials = int(cfg.get("trials", 1000))
    net, best = optimize_allocation(bank, det)
    audit = random_network_audit(bank, trials, seed, det)
    result = {"optimal": best.to_dict(), "network": net.matrix.tolist(), "audit": audit.to_dict()}
    if "extra_db" in cfg:
        bigger = SqueezerBank(bank.variances + SqueezerBank.from_db(cfg["extra_db"]).variances)
        _, ext = optimize_allocation(bigger, det)
        result["extended"] = {**ext.to_dict(), "change": ext.gamma_inv_11 - best.gamma_inv_11}
    out = _out(args)
    io.write_json(out / "allocation.json", result)
    io.write_csv(out / "audit.csv", ["trial", "alignment", "gamma_inv_11"], [[k, a, g] for k, (a, g) in enumerate(audit.rows)])
    print(f"optimal gamma_inv_11 {best.gamma_inv_11:.12g} (spectral radius {best.spectral_radius:.12g}); "
          f"audit max {audit.max_gamma_inv_11:.12g} over {trials} trials, violations {audit.violations}")
    return EXIT_OK if audit.passed else EXIT_VERIFY


COMMANDS = {
    "bound": cmd_bound,
    "oracle-check": cmd_oracle_check,
    "simulate": cmd_simulate,
    "allocate": cmd_allocate,
    "sweep": cmd_sweep,
    "modes": cmd_modes,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaussqcr", description="Quantum Cramer-Rao bounds for multimode Gaussian light")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None:
        env = os.environ.get(THREADS_ENV)
        try:
            args.threads = int(env) if env else 1
        except ValueError:
            print(f"config error: {THREADS_ENV} must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("config error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.command)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoInformation, ZeroDetectionMode, ZeroMeanField) as exc:
        print(f"model degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
