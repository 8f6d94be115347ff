"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 when any campaign
records a violated bound.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Iterable, Sequence

import numpy as np

from . import bounds as B
from .divergences import bures_angle, petz_renyi, sandwiched_renyi
from .errors import ConfigError, InvalidSpectrum, RenyiReachError
from .estimation import EstimationConfig, run_estimation
from .harness import (
    VerifyConfig,
    evolve,
    probe_tightness,
    verify_divergence_bound,
    verify_majorization,
    verify_tur,
)
from .linalg import Spectrum, spectrum_of
from .sampling import RngSeed, random_spectrum

SEED_ENV = "RENYI_REACH_SEED"

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- serialization


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(report: dict) -> str:
    """JSON text; non-finite floats become the strings ``"inf"``, ``"-inf"``, ``"nan"``."""
    return json.dumps(_plain(report), indent=2) + "\n"


def _revive(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _revive(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_revive(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def loads(text: str) -> Any:
    """Inverse of :func:`dumps`."""
    return _revive(json.loads(text))


def _csv_cell(v: Any) -> str:
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_csv_cell(x) for x in v)
    v = _plain(v)
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------- argument parsing


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _spectrum(values, flag: str) -> Spectrum:
    try:
        return Spectrum(np.asarray(values, dtype=float))
    except InvalidSpectrum as exc:
        total = float(np.sum(values)) if len(values) else 0.0
        if "sum" in str(exc):
            raise ConfigError(f"{flag}: spectrum sum ≠ 1 (got {total!r})") from exc
        raise ConfigError(f"{flag}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="renyi-reach", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON file with configuration fields")
        p.add_argument("--output", "-o", help="write report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--seed", type=int, default=None)
        return p

    def spectra(p, required=False):
        p.add_argument("--lambda-s", type=_floats, required=required, help="system spectrum")
        p.add_argument("--lambda-e", type=_floats, required=required, help="environment spectrum")

    p = common(sub.add_parser("bound", help="evaluate the spectral bounds"))
    spectra(p)
    p.add_argument("--alpha", type=_floats, default=None)
    p.add_argument("--r", type=_ints, default=None, help="repetition counts")

    for name, helptext in (
        ("verify", "divergence, Bures and majorization campaigns"),
        ("tur", "relative-variance campaign with random POVMs"),
    ):
        p = common(sub.add_parser(name, help=helptext))
        spectra(p)
        p.add_argument("--ds", type=int, default=None)
        p.add_argument("--de", type=int, default=None)
        p.add_argument("--alpha", type=_floats, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--outcomes", type=int, default=None, help="POVM outcome count")
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--extremal", action="store_true", help="append the saturating unitary as trial -1")
        p.add_argument("--include-trials", action="store_true", help="emit every trial row")

    p = common(sub.add_parser("estimate", help="Monte-Carlo estimation experiment"))
    spectra(p)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--r", type=_ints, default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--grid", type=_floats, default=None, help="min,max,step")

    p = common(sub.add_parser("saturate", help="build the bound-saturating unitary"))
    spectra(p)
    p.add_argument("--alpha", type=_floats, default=None)

    p = common(sub.add_parser("probe", help="search unitaries for the largest divergence"))
    spectra(p)
    p.add_argument("--alpha", type=_floats, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)

    p = common(sub.add_parser("sweep", help="tabulate bounds over parameter ranges"))
    spectra(p)
    p.add_argument("--alpha", type=_floats, default=None)
    p.add_argument("--ds", type=_ints, default=None)
    p.add_argument("--de", type=_ints, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--rmax", type=int, default=None)
    return parser


_FLAG_TO_FIELD = {
    "lambda_s": "lambda_s",
    "lambda_e": "lambda_e",
    "ds": "d_s",
    "de": "d_e",
    "alpha": "alpha_grid",
    "trials": "trials",
    "outcomes": "povm_outcomes",
    "tolerance": "tolerance",
    "theta": "theta_true",
    "theta0": "theta_0",
    "r": "repetitions",
    "shots": "shots",
    "grid": "grid",
    "restarts": "restarts",
    "budget": "budget",
    "samples": "samples",
    "rmax": "rmax",
    "seed": "seed",
    "format": "format",
}


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge config-file fields with inline flags (flags win)."""
    settings: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config: cannot read {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("--config: top level must be an object")
        settings.update(data)
    for flag, name in _FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            settings[name] = v
    if "seed" not in settings:
        env = os.environ.get(SEED_ENV)
        try:
            settings["seed"] = int(env) if env else 0
        except ValueError:
            raise ConfigError(f"{SEED_ENV}: not an integer: {env!r}")
    return settings


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _states(settings) -> tuple[np.ndarray, np.ndarray] | None:
    if "lambda_s" not in settings and "lambda_e" not in settings:
        return None
    if "lambda_s" not in settings or "lambda_e" not in settings:
        raise ConfigError("--lambda-s and --lambda-e must be given together")
    ls = _spectrum(settings["lambda_s"], "--lambda-s")
    le = _spectrum(settings["lambda_e"], "--lambda-e")
    return np.diag(ls.values).astype(complex), np.diag(le.values).astype(complex)


def _verify_config(settings, **defaults) -> VerifyConfig:
    states = _states(settings)
    fields = dict(defaults)
    for key in ("d_s", "d_e", "trials", "povm_outcomes", "tolerance", "seed"):
        if key in settings:
            fields[key] = settings[key]
    if "alpha_grid" in settings:
        fields["alpha_grid"] = tuple(_as_list(settings["alpha_grid"]))
    if states is not None:
        fields["rho_s"], fields["rho_e"] = states
        fields["d_s"], fields["d_e"] = states[0].shape[0], states[1].shape[0]
    return VerifyConfig(**fields)


# ---------------------------------------------------------------- commands


def cmd_bound(settings) -> tuple[dict, int]:
    if _states(settings) is None:
        raise ConfigError("bound needs --lambda-s and --lambda-e")
    ls = _spectrum(settings["lambda_s"], "--lambda-s")
    le = _spectrum(settings["lambda_e"], "--lambda-e")
    alphas = _as_list(settings.get("alpha_grid", [2.0]))
    rs = _as_list(settings.get("repetitions", [1]))
    if not alphas:
        raise ConfigError("--alpha: empty range")
    entries = []
    for alpha in alphas:
        bs = B.compute_bounds(ls, le, alpha, rs)
        entries.append(
            {
                "alpha": bs.alpha,
                "c_sums": bs.c_sums,
                "optimal_spectrum": bs.optimal_spectrum,
                "divergence_bound": bs.divergence_bound,
                "bures_bound": bs.bures_bound,
                "tur_bound": bs.tur_bound,
                "estimator_bounds": bs.estimator_bounds,
            }
        )
    report = {
        "command": "bound",
        "lambda_s": ls.values,
        "lambda_e": le.values,
        "bounds": entries,
    }
    return report, EXIT_OK


def cmd_verify(settings) -> tuple[dict, int]:
    cfg = _verify_config(settings, include_extremal=settings.get("extremal", False))
    rows = settings.get("include_trials", False)
    div = verify_divergence_bound(cfg)
    maj = verify_majorization(cfg)
    report = {
        "command": "verify",
        "config": cfg.describe(),
        "divergence": div.to_dict(rows)["summary"],
        "majorization": maj.to_dict(rows)["summary"],
    }
    if rows:
        report["divergence_rows"] = div.to_dict(True)["rows"]
        report["majorization_rows"] = maj.to_dict(True)["rows"]
    bad = div.violations + maj.violations
    return report, EXIT_VIOLATION if bad else EXIT_OK


def cmd_tur(settings) -> tuple[dict, int]:
    cfg = _verify_config(settings)
    rep = verify_tur(cfg)
    report = {"command": "tur", **rep.to_dict(settings.get("include_trials", False))}
    return report, EXIT_VIOLATION if rep.violations else EXIT_OK


def cmd_estimate(settings) -> tuple[dict, int]:
    states = _states(settings) or (np.diag([0.6, 0.4]), np.diag([0.9, 0.1]))
    grid = settings.get("grid")
    if grid is not None and len(grid) != 3:
        raise ConfigError("--grid: expected min,max,step")
    runs = []
    for r in _as_list(settings.get("repetitions", [1])):
        cfg = EstimationConfig(
            rho_s=states[0],
            rho_e=states[1],
            theta_true=float(settings.get("theta_true", 0.3)),
            theta_0=float(settings.get("theta_0", 0.0)),
            repetitions=int(r),
            shots=int(settings.get("shots", 10_000)),
            grid=tuple(grid) if grid is not None else None,
            seed=int(settings["seed"]),
        )
        runs.append(run_estimation(cfg).to_dict())
    report = {
        "command": "estimate",
        "generator": "swap",
        "povm": "computational",
        "lambda_s": spectrum_of(states[0]).values,
        "lambda_e": spectrum_of(states[1]).values,
        "runs": runs,
    }
    bad = any(r["violation"] for r in runs)
    return report, EXIT_VIOLATION if bad else EXIT_OK


def cmd_saturate(settings) -> tuple[dict, int]:
    states = _states(settings)
    if states is None:
        raise ConfigError("saturate needs --lambda-s and --lambda-e")
    rho_s, rho_e = states
    u = B.extremal_unitary(rho_s, rho_e)
    sigma = evolve(rho_s, rho_e, u)
    ls, le = spectrum_of(rho_s), spectrum_of(rho_e)
    rows = []
    worst = 0.0
    for alpha in _as_list(settings.get("alpha_grid", [0.5, 2.0])):
        bound = B.divergence_bound(ls, le, alpha)
        petz = petz_renyi(rho_s, sigma, alpha)
        gap = 0.0 if petz == bound else abs(bound - petz)
        worst = max(worst, gap)
        rows.append(
            {
                "alpha": alpha,
                "petz": petz,
                "sandwiched": sandwiched_renyi(rho_s, sigma, alpha),
                "bound": bound,
                "gap": gap,
            }
        )
    report = {
        "command": "saturate",
        "sigma_spectrum": spectrum_of(sigma).values,
        "optimal_spectrum": B.reachable_optimum(ls, le),
        "bures_angle": bures_angle(rho_s, sigma),
        "bures_bound": B.bures_bound(ls, le),
        "rows": rows,
    }
    return report, EXIT_OK if worst <= 1e-8 else EXIT_VIOLATION


def cmd_probe(settings) -> tuple[dict, int]:
    cfg = _verify_config(settings, trials=0)
    results = []
    bad = False
    for alpha in cfg.alpha_grid:
        res = probe_tightness(
            cfg,
            budget=int(settings.get("budget", 4000)),
            restarts=int(settings.get("restarts", 20)),
            alpha=alpha,
        )
        bad |= res.report.violation
        results.append(
            {
                "alpha": alpha,
                "best_value": res.best_value,
                "bound": res.report.bound,
                "gap": res.gap,
                "restart": res.restart,
                "evaluations": res.evaluations,
                "budget_exhausted": res.exhausted,
                "params": res.params,
            }
        )
    report = {"command": "probe", "config": cfg.describe(), "results": results}
    return report, EXIT_VIOLATION if bad else EXIT_OK


def sweep_columns(rmax: int) -> list[str]:
    base = ["alpha", "d_s", "d_e", "lambda_s", "lambda_e", "div_bound", "bures_bound", "tur_bound"]
    return base + [f"est_bound_r{r}" for r in range(1, rmax + 1)]


def emit_sweep(
    alphas: Iterable[float],
    dims: Iterable[tuple[int, int]] = ((2, 2),),
    samples: int = 1,
    seed: int = 0,
    spectra: tuple | None = None,
    rmax: int = 4,
) -> list[dict]:
    """One row of bound values per (dimensions, spectrum sample, alpha).

    With ``spectra`` given, that single pair replaces the random samples.
    Random spectra for sample ``s`` come from stream ``(seed, s)``.
    """
    alphas = list(alphas)
    if not alphas:
        raise ConfigError("--alpha: empty range")
    if rmax < 1:
        raise ConfigError("--rmax must be >= 1")
    rows = []
    pairs = []
    if spectra is not None:
        ls, le = (Spectrum(np.asarray(v, dtype=float)) for v in spectra)
        pairs.append((ls, le))
    else:
        for d_s, d_e in dims:
            for s in range(samples):
                gen = RngSeed(seed, s).generator()
                pairs.append((random_spectrum(d_s, gen), random_spectrum(d_e, gen)))
    for ls, le in pairs:
        est = {f"est_bound_r{r}": B.estimator_bound(ls, le, r) for r in range(1, rmax + 1)}
        for alpha in alphas:
            rows.append(
                {
                    "alpha": float(alpha),
                    "d_s": len(ls),
                    "d_e": len(le),
                    "lambda_s": ls.values,
                    "lambda_e": le.values,
                    "div_bound": B.divergence_bound(ls, le, alpha),
                    "bures_bound": B.bures_bound(ls, le),
                    "tur_bound": B.tur_bound(ls, le),
                    **est,
                }
            )
    return rows


def cmd_sweep(settings) -> tuple[dict, int]:
    spectra = None
    if _states(settings) is not None:
        spectra = (settings["lambda_s"], settings["lambda_e"])
    ds = _as_list(settings.get("d_s", [2]))
    de = _as_list(settings.get("d_e", [2]))
    rmax = int(settings.get("rmax", 4))
    rows = emit_sweep(
        _as_list(settings.get("alpha_grid", [0.5, 2.0])),
        dims=[(a, b) for a in ds for b in de],
        samples=int(settings.get("samples", 1)),
        seed=int(settings["seed"]),
        spectra=spectra,
        rmax=rmax,
    )
    return {"command": "sweep", "columns": sweep_columns(rmax), "rows": rows}, EXIT_OK


COMMANDS = {
    "bound": cmd_bound,
    "verify": cmd_verify,
    "tur": cmd_tur,
    "estimate": cmd_estimate,
    "saturate": cmd_saturate,
    "probe": cmd_probe,
    "sweep": cmd_sweep,
}


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report)
    if report["command"] == "sweep":
        return to_csv(report["rows"], report["columns"])
    if report["command"] == "bound":
        rs = sorted({r for e in report["bounds"] for r in e["estimator_bounds"]})
        cols = ["alpha", "divergence_bound", "bures_bound", "tur_bound"] + [f"est_bound_r{r}" for r in rs]
        rows = [
            {**e, **{f"est_bound_r{r}": e["estimator_bounds"][r] for r in rs}} for e in report["bounds"]
        ]
        return to_csv(rows, cols)
    raise ConfigError(f"--format csv is not available for {report['command']}")


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        settings = resolve_settings(args)
        for flag in ("extremal", "include_trials"):
            if getattr(args, flag, False):
                settings[flag] = True
        fmt = settings.get("format") or ("csv" if args.command == "sweep" else "json")
        report, code = COMMANDS[args.command](settings)
        text = _render(report, fmt)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (RenyiReachError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
