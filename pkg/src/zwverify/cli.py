"""Command line interface.

Subcommands: ``init``, ``selftest``, ``predict``, ``compute``, ``fit``,
``verify`` and ``torsion``.  Exit codes: 0 success, 1 a check failed,
2 configuration error, 3 the requested accuracy could not be reached.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import mpmath as mp

from . import __version__
from .asymptotics import FitError, FitModel, difference_extract, fit, pinned_values, series_from
from .config import ConfigError, RunConfig, load_config, template
from .geometry import SurfaceScenario
from .partition import CSV_COLUMNS, PartitionValue, log_partition, write_csv
from .predictor import predict, predict_a0_corollary
from .special import NumericalResolutionError, PrecisionCtx, PrecisionError

log = logging.getLogger("zwverify")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


# --------------------------------------------------------------------------
# helpers


def _dump(obj, out: Path | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    if out is None:
        print(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, mp.mpf):
        return float(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _scenario_json(s: SurfaceScenario) -> dict:
    return {
        "genus": s.genus,
        "tau": complex(s.tau) if s.genus == 1 else None,
        "u": [list(m) for m in s.u],
        "psi": [list(m) for m in s.psi],
        "s0": complex(s.s0),
        "sDL": complex(s.sDL),
        "sDE": complex(s.sDE),
        "prequantized": s.prequantized,
    }


def _ctx(cfg: RunConfig, p: int) -> PrecisionCtx | None:
    if cfg.precision_digits:
        return PrecisionCtx(cfg.precision_digits)
    if cfg.scenario.genus == 0 and cfg.scenario.prequantized:
        return PrecisionCtx.for_degree(p)
    return None


def compute_series(cfg: RunConfig, strict: bool = True) -> list:
    """``log Z_p`` for every ``p`` in the configured range, in increasing ``p``."""
    rows = []
    for p in cfg.ps:
        try:
            rows.append(log_partition(cfg.scenario, p, _ctx(cfg, p), cfg.route, cfg.seed))
        except NumericalResolutionError as exc:
            if strict:
                raise
            rows.append(PartitionValue(p, cfg.scenario.N(p), float("nan"), "unresolved", 0, 0, float("inf"), {"reason": str(exc)}))
        log.info("p=%d done", p)
    return rows


def fit_both(series, cfg: RunConfig) -> dict:
    model = FitModel(nuisance=tuple(cfg.nuisance))
    free = fit(series, model)
    pinned = fit(series, model.with_pins(**pinned_values(cfg.scenario.euler_characteristic, cfg.scenario.degree)))
    return {"free": free, "pinned": pinned}


def compare(fits: dict, predicted, cfg: RunConfig) -> dict:
    """Per-coefficient deltas: ``b1, b0`` from the free fit, the rest pinned."""
    out = {}
    pred = predicted.as_dict()
    for name in ("a2", "b1", "a1", "b0", "a0"):
        if name not in pred:
            continue
        source = "free" if name in ("b1", "b0") else "pinned"
        fitted = fits[source].values[name]
        delta = fitted - pred[name]
        rel = name in cfg.relative
        measure = abs(delta) / abs(pred[name]) if rel and pred[name] != 0 else abs(delta)
        tol = cfg.tolerances[name]
        out[name] = {
            "fitted": fitted,
            "predicted": pred[name],
            "delta": delta,
            "relative": rel,
            "tolerance": tol,
            "protocol": source,
            "pass": bool(measure <= tol),
        }
    return out


def run_verify(cfg: RunConfig, series=None, predict_scenario: SurfaceScenario | None = None) -> dict:
    """predict, compute, fit and compare; ``predict_scenario`` overrides the predictor input."""
    series = series if series is not None else compute_series(cfg)
    fits = fit_both(series, cfg)
    predicted = predict(predict_scenario or cfg.scenario)
    deltas = compare(fits, predicted, cfg)
    report = {
        "scenario": _scenario_json(cfg.scenario),
        "p_range": [cfg.p_min, cfg.p_max],
        "predicted": predicted.to_json(),
        "free_fit": fits["free"].to_json(),
        "pinned_fit": fits["pinned"].to_json(),
        "deltas": deltas,
        "pass": all(d["pass"] for d in deltas.values()),
    }
    if cfg.scenario.prequantized:
        report["a0_corollary"] = predict_a0_corollary(cfg.scenario)
    return report


def residual_rows(series, fitted: dict) -> list[dict]:
    """``log Z_p`` minus the fitted ``p^2``, ``p log p`` and ``p`` terms."""
    rows = []
    for p, v, _ in series_from(series):
        lead = fitted["a2"] * p * p + fitted["b1"] * p * math.log(p) + fitted["a1"] * p
        rows.append({"p": p, "residual": repr(float(v) - lead)})
    return rows


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    missing = set(CSV_COLUMNS) - set(rows[0] if rows else CSV_COLUMNS)
    if missing:
        raise ConfigError(f"{path} lacks column(s) {', '.join(sorted(missing))}")
    bad = [r["p"] for r in rows if r["method"] == "unresolved"]
    if bad:
        raise NumericalResolutionError(f"rows for p = {', '.join(bad)} are unresolved")
    return rows


# --------------------------------------------------------------------------
# subcommands


def cmd_init(args) -> int:
    out = Path(args.out or "zwverify.toml")
    if out.exists() and not args.force:
        raise ConfigError(f"{out} exists; pass --force to overwrite")
    out.write_text(template(args.genus))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from . import graded_det
    from .special import self_test

    ctx = PrecisionCtx(args.precision_digits or 64, args.tolerance)
    res = self_test(ctx)
    failed = None
    for name, val in res.items():
        ok = val <= args.tolerance
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {val:.3e}")
        if not ok and failed is None:
            failed = name
    fails = graded_det.property_suite(args.trials, args.seed or 0)
    for name, n in fails.items():
        print(f"{'ok  ' if n == 0 else 'FAIL'} graded:{name}: {n} failures in {args.trials} trials")
        if n and failed is None:
            failed = f"graded:{name}"
    if failed:
        print(f"selftest failed: {failed}", file=sys.stderr)
        return EXIT_FAIL
    print("selftest passed")
    return EXIT_OK


def _load(args, require_fit: bool = False) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    return cfg.override(args.p_min, args.p_max, args.seed, args.precision_digits, require_fit)


def cmd_predict(args) -> int:
    cfg = _load(args)
    c = predict(cfg.scenario)
    out = c.to_json()
    if cfg.scenario.prequantized:
        out["a0_corollary"] = predict_a0_corollary(cfg.scenario)
    _dump(out, args.out)
    return EXIT_OK


def cmd_compute(args) -> int:
    cfg = _load(args)
    rows = compute_series(cfg, strict=False)
    out = Path(args.out or cfg.output_dir / "partition.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    bad = [r.p for r in rows if r.method == "unresolved"]
    if bad:
        print(f"unresolved p: {bad}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load(args, require_fit=True)
    src = Path(args.input or cfg.output_dir / "partition.csv")
    rows = [r for r in read_csv(src) if cfg.p_min <= int(r["p"]) <= cfg.p_max]
    fits = fit_both(rows, cfg)
    report = {k: v.to_json() for k, v in fits.items()}
    try:
        report["difference"] = difference_extract(rows, FitModel(nuisance=tuple(cfg.nuisance))).to_json()
    except FitError as exc:
        report["difference"] = {"skipped": str(exc)}
    _dump(report, args.out or cfg.output_dir / "fit.json")
    with open(cfg.output_dir / "residuals.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["p", "residual"])
        w.writeheader()
        w.writerows(residual_rows(rows, fits["pinned"].values))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load(args, require_fit=True)
    series = compute_series(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_csv(series, cfg.output_dir / "partition.csv")
    report = run_verify(cfg, series)
    _dump(report, args.out or cfg.output_dir / "verify.json")
    for name, d in report["deltas"].items():
        flag = "ok  " if d["pass"] else "FAIL"
        kind = "rel" if d["relative"] else "abs"
        print(f"{flag} {name} ({d['protocol']}): fitted {d['fitted']:.8g} predicted {d['predicted']:.8g} delta {d['delta']:.3e} ({kind} tol {d['tolerance']:g})")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_torsion(args) -> int:
    from .torsion import torsion_Lp_flat_torus, torsion_trivial_E

    cfg = _load(args)
    s = cfg.scenario
    if not s.prequantized:
        raise ConfigError("torsion is available for unperturbed scenarios only")
    out = [torsion_trivial_E(s).to_json()]
    if s.genus == 1:
        for p in cfg.ps:
            out.append(torsion_Lp_flat_torus(s.tau, p, check=True).to_json())
    _dump(out, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--out", metavar="PATH", help="output file")
    common.add_argument("--p-min", type=int, metavar="N")
    common.add_argument("--p-max", type=int, metavar="N")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--precision-digits", type=int, metavar="N")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="zwverify", description="Verify the large-p expansion of log Z_p.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common], help="write a commented configuration template")
    p.add_argument("--genus", type=int, choices=(0, 1), default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("selftest", parents=[common], help="identity residuals and graded-line properties")
    p.add_argument("--tolerance", type=float, default=1e-20)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("predict", parents=[common], help="closed-form coefficients as JSON")
    p.set_defaults(func=cmd_predict)
    p = sub.add_parser("compute", parents=[common], help="log Z_p for the configured range as CSV")
    p.set_defaults(func=cmd_compute)
    p = sub.add_parser("fit", parents=[common], help="fit a partition CSV")
    p.add_argument("--input", metavar="PATH", help="partition CSV (default: output directory)")
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("verify", parents=[common], help="predict, compute, fit and compare")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("torsion", parents=[common], help="torsion values as JSON")
    p.set_defaults(func=cmd_torsion)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalResolutionError as exc:
        print(f"numerical resolution failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
