"""Command-line front end: simulation, tests, sweeps, estimation, entanglement potential.

Results go to stdout as a single JSON object; bulk tables go to CSV files.
Every run echoes its fully resolved configuration (built-in defaults, then a
--config JSON file, then explicit flags) into the output. Exit codes:
0 success, 1 usage error, 2 data error, 3 numeric failure. Errors also emit a
machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .binning import histogram
from .data import (
    Dataset,
    inject_phase_noise,
    read_csv,
    sample_dataset,
    select_phase_window,
    simulation_params,
    write_csv,
)
from .detect import (
    analytic_three_bin_R,
    moment_matrix,
    moment_matrix_from_moments,
    normally_ordered_moments,
    three_bin_R,
)
from .errors import CsvFormatError, EigensolverError, EstimationError, UndefinedStatisticError
from .estimate import (
    db_from_variance,
    estimate_params,
    squeezing_for_target,
    summarize,
    variance_from_db,
)
from .fock import entanglement_potential, state_from_params
from .model import QuadratureDistribution, StateParams, diffused_variance, kurtosis_x
from .stats import (
    REPLACEMENT,
    SUBSAMPLE,
    BootstrapSpec,
    bootstrap,
    compare_methods,
    resample_indices,
    three_bin_statistic,
    violation_bin,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through the package's exit taxonomy instead
    def error(self, message):
        raise UsageError(message)


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _fail(code: int, exc: BaseException) -> int:
    obj = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(json.dumps(obj, sort_keys=True) + "\n")
    return code


def _resolve(args, defaults: dict) -> dict:
    """Layer built-in defaults, config-file values and explicit flags."""
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    out = {}
    for key, default in defaults.items():
        flag_value = getattr(args, key, None)
        out[key] = flag_value if flag_value is not None else cfg.get(key, default)
    return out


def _require(resolved: dict, *keys: str) -> None:
    missing = [k for k in keys if resolved.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _bootstrap_spec(resolved: dict, pool: int) -> BootstrapSpec:
    size = resolved["resample_size"]
    if size is None:
        size = pool if resolved["mode"] == REPLACEMENT else max(1, pool // 4)
    return BootstrapSpec(int(size), int(resolved["bootstrap"]), int(resolved["seed"]), resolved["mode"])


def _biased_variance(x: np.ndarray) -> float:
    d = x - x.mean()
    return float((d**2).mean())


# ---------------------------------------------------------------- simulate

SIMULATE_OPTS = {
    "r": None,
    "target_db": None,
    "loss": 0.0,
    "delta": 0.0,
    "n": 10_000,
    "seed": 0,
    "phase_window": 0.0,
    "center": 0.0,
    "out": None,
}


def cmd_simulate(args) -> dict:
    cfg = _resolve(args, SIMULATE_OPTS)
    _require(cfg, "out")
    if (cfg["r"] is None) == (cfg["target_db"] is None):
        raise UsageError("exactly one of --r and --target-db is required")
    if cfg["r"] is None:
        cfg["r"] = squeezing_for_target(variance_from_db(cfg["target_db"]), cfg["loss"], cfg["delta"])
    params = StateParams(cfg["r"], cfg["loss"], cfg["delta"])
    data = sample_dataset(params, int(cfg["n"]), int(cfg["seed"]), cfg["phase_window"], cfg["center"])
    write_csv(data, cfg["out"])
    return {
        "n": data.n,
        "out": cfg["out"],
        "r": params.r,
        "loss": params.loss,
        "delta": params.delta,
        "var_x_db": db_from_variance(_biased_variance(data.x)),
        "config": cfg,
    }


# ---------------------------------------------------------------- three-bin

THREE_BIN_OPTS = {
    "in_path": None,
    "sigma": 1.0,
    "d": 1,
    "bootstrap": 100,
    "resample_size": None,
    "mode": SUBSAMPLE,
    "seed": 0,
}


def _three_bin_row(data: Dataset, sigma: float, d: int, spec: BootstrapSpec) -> dict:
    point = three_bin_R(histogram(data, sigma), d)
    boot = bootstrap(data, spec, three_bin_statistic(sigma, d))
    report = violation_bin(boot.samples, sigma=sigma, d=d, n_flagged=boot.n_flagged)
    params = simulation_params(data.meta)
    analytic = None
    if params is not None:
        analytic = analytic_three_bin_R(QuadratureDistribution(params, "x"), sigma, d)
    return {
        "sigma": sigma,
        "d": d,
        "r_point": point.r_value,
        "r_mean": report.mean,
        "r_std": report.std,
        "v": report.v,
        "nonclassical": report.mean < 1.0,
        "analytic": analytic,
        "n_flagged": report.n_flagged,
    }


def cmd_three_bin(args) -> dict:
    cfg = _resolve(args, THREE_BIN_OPTS)
    _require(cfg, "in_path")
    data = read_csv(cfg["in_path"])
    spec = _bootstrap_spec(cfg, data.n)
    row = _three_bin_row(data, float(cfg["sigma"]), int(cfg["d"]), spec)
    row["config"] = cfg
    return row


# ---------------------------------------------------------------- sweep-sigma

SWEEP_OPTS = {
    "in_path": None,
    "sigma_from": 0.2,
    "sigma_to": 3.0,
    "steps": 15,
    "d": 1,
    "bootstrap": 100,
    "resample_size": None,
    "mode": SUBSAMPLE,
    "seed": 0,
    "out": None,
}


def cmd_sweep_sigma(args) -> dict:
    cfg = _resolve(args, SWEEP_OPTS)
    _require(cfg, "in_path", "out")
    data = read_csv(cfg["in_path"])
    spec = _bootstrap_spec(cfg, data.n)
    steps = int(cfg["steps"])
    if steps < 1:
        raise UsageError("--steps must be >= 1")
    sigmas = np.linspace(float(cfg["sigma_from"]), float(cfg["sigma_to"]), steps)
    d = int(cfg["d"])
    params = simulation_params(data.meta)
    dist = QuadratureDistribution(params, "x") if params is not None else None

    # one shared resample stream so neighbouring sigma values are paired
    values = np.empty((steps, spec.n_resamples))
    stats = [three_bin_statistic(float(s), d) for s in sigmas]
    for b in range(spec.n_resamples):
        xs = data.x[resample_indices(spec, data.n, b)]
        for i, stat in enumerate(stats):
            values[i, b] = stat(xs)[0]

    rows = []
    for i, s in enumerate(sigmas):
        mean = float(values[i].mean())
        std = float(values[i].std())
        rows.append(
            {
                "sigma": float(s),
                "r_mean": mean,
                "r_std": std,
                "analytic": analytic_three_bin_R(dist, float(s), d) if dist is not None else None,
                "nonclassical": mean < 1.0,
            }
        )
    lines = ["sigma,r_mean,r_std,r_analytic,nonclassical"]
    for row in rows:
        analytic = "" if row["analytic"] is None else repr(row["analytic"])
        lines.append(
            f"{row['sigma']!r},{row['r_mean']!r},{row['r_std']!r},{analytic},{int(row['nonclassical'])}"
        )
    with open(cfg["out"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    best = min(rows, key=lambda row: row["r_mean"])
    return {
        "out": cfg["out"],
        "d": d,
        "steps": steps,
        "min_sigma": best["sigma"],
        "min_r_mean": best["r_mean"],
        "min_r_std": best["r_std"],
        "config": cfg,
    }


# ---------------------------------------------------------------- moments

MOMENTS_OPTS = {
    "in_path": None,
    "n_max": 6,
    "bootstrap": 100,
    "resample_size": None,
    "mode": SUBSAMPLE,
    "seed": 0,
}


def cmd_moments(args) -> dict:
    cfg = _resolve(args, MOMENTS_OPTS)
    _require(cfg, "in_path")
    data = read_csv(cfg["in_path"])
    n_max = int(cfg["n_max"])
    if not 2 <= n_max <= 8:
        raise UsageError("--n-max must lie in [2, 8]")
    spec = _bootstrap_spec(cfg, data.n)
    orders = list(range(2, n_max + 1))
    lam = {n: np.empty(spec.n_resamples) for n in orders}
    for b in range(spec.n_resamples):
        xs = data.x[resample_indices(spec, data.n, b)]
        moms = normally_ordered_moments(xs, 2 * n_max - 2)
        for n in orders:
            lam[n][b] = moment_matrix_from_moments(moms, n).lambda_min
    rows = []
    for n in orders:
        point = moment_matrix(data, n)
        mean = float(lam[n].mean())
        std = float(lam[n].std())
        rows.append(
            {
                "n": n,
                "lambda_point": point.lambda_min,
                "lambda_mean": mean,
                "lambda_std": std,
                "v": (0.0 - mean) / std if std > 0 else None,
                "nonclassical": mean < 0.0,
            }
        )
    return {"rows": rows, "config": cfg}


# ---------------------------------------------------------------- estimate

ESTIMATE_OPTS = {
    "in_x": None,
    "in_p": None,
    "bootstrap": 100,
    "resample_size": None,
    "mode": REPLACEMENT,
    "seed": 0,
}


def cmd_estimate(args) -> dict:
    cfg = _resolve(args, ESTIMATE_OPTS)
    _require(cfg, "in_x", "in_p")
    data_x = read_csv(cfg["in_x"])
    data_p = read_csv(cfg["in_p"])
    summary = summarize(data_x, data_p)
    params = estimate_params(summary)
    spec = _bootstrap_spec(cfg, min(data_x.n, data_p.n))
    draws = {"r": [], "l": [], "delta": []}
    flagged = 0
    for b in range(spec.n_resamples):
        ix = resample_indices(spec, data_x.n, b, stream=1)
        ip = resample_indices(spec, data_p.n, b, stream=2)
        try:
            pb = estimate_params(summarize(Dataset(data_x.theta[ix], data_x.x[ix]), Dataset(data_p.theta[ip], data_p.x[ip])))
        except (EstimationError, ValueError):
            flagged += 1
            continue
        draws["r"].append(pb.r)
        draws["l"].append(pb.loss)
        draws["delta"].append(pb.delta)
    stds = {k: (float(np.std(v)) if v else None) for k, v in draws.items()}
    residuals = {
        "var_x": abs(diffused_variance(params, "x") - summary.var_x) / summary.var_x,
        "var_p": abs(diffused_variance(params, "p") - summary.var_p) / summary.var_p,
        "kurt_x": abs(kurtosis_x(params) - summary.kurt_x) / summary.kurt_x,
    }
    return {
        "r": params.r,
        "l": params.loss,
        "delta": params.delta,
        "std_r": stds["r"],
        "std_l": stds["l"],
        "std_delta": stds["delta"],
        "var_x_db": db_from_variance(summary.var_x),
        "var_p_db": db_from_variance(summary.var_p),
        "residuals": residuals,
        "summary": {"var_x": summary.var_x, "var_p": summary.var_p, "kurt_x": summary.kurt_x},
        "n_flagged": flagged,
        "config": cfg,
    }


# ---------------------------------------------------------------- ep

EP_OPTS = {"r": None, "loss": 0.0, "delta": 0.0, "cutoff": 10}


def cmd_ep(args) -> dict:
    cfg = _resolve(args, EP_OPTS)
    _require(cfg, "r")
    params = StateParams(cfg["r"], cfg["loss"], cfg["delta"])
    state = state_from_params(params, int(cfg["cutoff"]))
    return {
        "ep": entanglement_potential(state),
        "cutoff": state.cutoff,
        "truncated_mass": state.truncated_mass,
        "trace": state.trace,
        "config": cfg,
    }


# ---------------------------------------------------------------- compare

COMPARE_OPTS = {
    "in_path": None,
    "sigma": 1.0,
    "d": 1,
    "n_list": "2,3,4,5,6",
    "bootstrap": 100,
    "resample_size": None,
    "mode": SUBSAMPLE,
    "seed": 0,
    "cutoff": 10,
    "out": None,
}


def cmd_compare(args) -> dict:
    cfg = _resolve(args, COMPARE_OPTS)
    _require(cfg, "in_path")
    data = read_csv(cfg["in_path"])
    orders = [int(tok) for tok in str(cfg["n_list"]).split(",") if tok.strip()]
    spec = _bootstrap_spec(cfg, data.n)
    reports = compare_methods(data, float(cfg["sigma"]), int(cfg["d"]), orders, spec)
    params = simulation_params(data.meta)
    ep = None
    if params is not None:
        ep = entanglement_potential(state_from_params(params, int(cfg["cutoff"])))
    if cfg["out"]:
        lines = ["method,sigma,d,n,mean,std,v,n_flagged"]
        for rep in reports:
            p = rep.params
            lines.append(
                ",".join(
                    [
                        rep.method,
                        repr(p.get("sigma", "")) if "sigma" in p else "",
                        str(p.get("d", "")),
                        str(p.get("n", "")),
                        repr(rep.mean),
                        repr(rep.std),
                        repr(rep.v),
                        str(rep.n_flagged),
                    ]
                )
            )
        with open(cfg["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    return {
        "delta": params.delta if params is not None else None,
        "reports": [rep.to_json_dict() for rep in reports],
        "ep": ep,
        "config": cfg,
    }


# ---------------------------------------------------------------- inject / select

INJECT_OPTS = {"in_path": None, "delta_e": None, "seed": 0, "out": None}


def cmd_inject(args) -> dict:
    cfg = _resolve(args, INJECT_OPTS)
    _require(cfg, "in_path", "delta_e", "out")
    data = read_csv(cfg["in_path"])
    noisy = inject_phase_noise(data, float(cfg["delta_e"]), int(cfg["seed"]))
    write_csv(noisy, cfg["out"])
    return {"n": noisy.n, "delta_e": float(cfg["delta_e"]), "out": cfg["out"], "config": cfg}


SELECT_OPTS = {"in_path": None, "center": 0.0, "half_width": None, "out": None}


def cmd_select(args) -> dict:
    cfg = _resolve(args, SELECT_OPTS)
    _require(cfg, "in_path", "half_width", "out")
    data = read_csv(cfg["in_path"])
    kept = select_phase_window(data, float(cfg["center"]), float(cfg["half_width"]))
    write_csv(kept, cfg["out"])
    return {
        "n_in": data.n,
        "n_kept": kept.n,
        "fraction": kept.n / data.n if data.n else 0.0,
        "empty": kept.meta["empty_selection"],
        "out": cfg["out"],
        "config": cfg,
    }


# ---------------------------------------------------------------- parser

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file with option values; explicit flags win")


def _add_bootstrap_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--bootstrap", type=int, help="number of resamples B")
    sub.add_argument("--resample-size", dest="resample_size", type=int, help="records per resample")
    sub.add_argument("--mode", choices=[SUBSAMPLE, REPLACEMENT], help="resampling mode")
    sub.add_argument("--seed", type=int, help="master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quadbin", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command")

    s = subs.add_parser("simulate", parents=[], help="draw homodyne records from the forward model")
    s.add_argument("--r", type=float, help="squeezing parameter")
    s.add_argument("--target-db", dest="target_db", type=float, help="target squeezing-axis variance in dB")
    s.add_argument("--loss", type=float)
    s.add_argument("--delta", type=float, help="phase-diffusion spread (rad)")
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--phase-window", dest="phase_window", type=float, help="half-width of a uniform phase scan (rad)")
    s.add_argument("--center", type=float, help="nominal measurement phase (rad)")
    s.add_argument("--out", help="CSV output path")
    _add_common(s)
    s.set_defaults(run=cmd_simulate)

    s = subs.add_parser("three-bin", help="binned ratio test with bootstrap errors")
    s.add_argument("--in", dest="in_path", help="input CSV")
    s.add_argument("--sigma", type=float)
    s.add_argument("--d", type=int)
    _add_bootstrap_flags(s)
    _add_common(s)
    s.set_defaults(run=cmd_three_bin)

    s = subs.add_parser("sweep-sigma", help="bin-size sweep of the ratio test")
    s.add_argument("--in", dest="in_path")
    s.add_argument("--sigma-from", dest="sigma_from", type=float)
    s.add_argument("--sigma-to", dest="sigma_to", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--out", help="CSV output path")
    _add_bootstrap_flags(s)
    _add_common(s)
    s.set_defaults(run=cmd_sweep_sigma)

    s = subs.add_parser("moments", help="minimum moment-matrix eigenvalues up to order n-max")
    s.add_argument("--in", dest="in_path")
    s.add_argument("--n-max", dest="n_max", type=int)
    _add_bootstrap_flags(s)
    _add_common(s)
    s.set_defaults(run=cmd_moments)

    s = subs.add_parser("estimate", help="recover (r, loss, delta) from x and p quadrature files")
    s.add_argument("--in-x", dest="in_x")
    s.add_argument("--in-p", dest="in_p")
    _add_bootstrap_flags(s)
    _add_common(s)
    s.set_defaults(run=cmd_estimate)

    s = subs.add_parser("ep", help="entanglement potential of the forward state")
    s.add_argument("--r", type=float)
    s.add_argument("--loss", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--cutoff", type=int)
    _add_common(s)
    s.set_defaults(run=cmd_ep)

    s = subs.add_parser("compare", help="paired bin-test vs moment-method comparison")
    s.add_argument("--in", dest="in_path")
    s.add_argument("--sigma", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--n-list", dest="n_list", help="comma-separated moment orders")
    s.add_argument("--cutoff", type=int)
    s.add_argument("--out", help="optional CSV table")
    _add_bootstrap_flags(s)
    _add_common(s)
    s.set_defaults(run=cmd_compare)

    s = subs.add_parser("inject", help="add Gaussian noise to the recorded phases")
    s.add_argument("--in", dest="in_path")
    s.add_argument("--delta-e", dest="delta_e", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    _add_common(s)
    s.set_defaults(run=cmd_inject)

    s = subs.add_parser("select", help="keep records inside a phase window")
    s.add_argument("--in", dest="in_path")
    s.add_argument("--center", type=float)
    s.add_argument("--half-width", dest="half_width", type=float)
    s.add_argument("--out")
    _add_common(s)
    s.set_defaults(run=cmd_select)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "run"):
            raise UsageError("a subcommand is required (see --help)")
        _emit(args.run(args))
        return EXIT_OK
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except (CsvFormatError, UndefinedStatisticError, FileNotFoundError) as exc:
        return _fail(EXIT_DATA, exc)
    except (EstimationError, EigensolverError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except ValueError as exc:
        return _fail(EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
