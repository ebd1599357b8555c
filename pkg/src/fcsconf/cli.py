"""Command-line front end: ``landscape``, ``run`` and ``report``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from . import metrics
from .conformal import CandidateGrid
from .landscape import Landscape, LandscapeFormatError, generate_synthetic_landscape, load_landscape, save_landscape
from .simulate import GRID_METHODS, METHODS, TrialConfig, TrialError, run_trials
from .tables import TableError, read_records, write_records, write_summaries, write_table

CONFIG_VERSION = 1

DEFAULTS = {
    "version": CONFIG_VERSION,
    "landscape": {"synthetic": {"length": 10, "max_order": 2, "coeff_sd": [0.2, 0.1],
                                "noise_sd": 0.1, "seed": 0},
                  "feature_order": 2},
    "n": [32],
    "lambda": [0.0],
    "methods": ["fcs_full"],
    "alpha": 0.1,
    "gamma": 1.0,
    "grid": None,
    "trials": 100,
    "seed": 0,
    "noise_scale": 1.0,
    "n_calib": None,
    "reference_id": None,
    "out": "out",
}


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


def load_config(path=None, overrides=None):
    """Defaults, then the JSON file at ``path``, then ``overrides``."""
    cfg = json.loads(json.dumps(DEFAULTS))
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if data.get("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {data['version']!r}")
        cfg.update(data)
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    for key in ("n", "lambda", "methods"):
        if not isinstance(cfg[key], list):
            cfg[key] = [cfg[key]]
    bad = [m for m in cfg["methods"] if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(METHODS)}")
    return cfg


def gamma_for(cfg, n):
    g = cfg["gamma"]
    if isinstance(g, dict):
        return float(g.get(str(n), g.get("default", 1.0)))
    return float(g)


def build_landscape(source) -> Landscape:
    order = int(source.get("feature_order", 2))
    if "path" in source:
        return load_landscape(source["path"], feature_order=order)
    syn = source.get("synthetic")
    if syn is None:
        raise ConfigError("landscape needs 'path' or 'synthetic'")
    return generate_synthetic_landscape(int(syn["length"]), int(syn["max_order"]), syn["coeff_sd"],
                                        float(syn.get("noise_sd", 0.0)), int(syn.get("seed", 0)),
                                        feature_order=order)


def trial_configs(cfg):
    grid = CandidateGrid.parse(cfg["grid"]) if cfg["grid"] else None
    for n, lam in itertools.product(cfg["n"], cfg["lambda"]):
        yield TrialConfig(n=int(n), lam=float(lam), gamma=gamma_for(cfg, n), alpha=float(cfg["alpha"]),
                          grid=grid, trials=int(cfg["trials"]), method=cfg["methods"][0],
                          seed=int(cfg["seed"]), noise_scale=float(cfg["noise_scale"]),
                          n_calib=cfg["n_calib"])


# ---------------------------------------------------------------------------

def cmd_landscape(args):
    cfg = load_config(args.config)
    source = cfg["landscape"]
    syn = dict(source.get("synthetic") or {})
    for key, val in (("length", args.length), ("max_order", args.max_order),
                     ("noise_sd", args.noise_sd), ("seed", args.seed)):
        if val is not None:
            syn[key] = val
    if args.coeff_sd is not None:
        syn["coeff_sd"] = _floats(args.coeff_sd)
    land = build_landscape({"synthetic": syn, "feature_order": source.get("feature_order", 2)})
    out = Path(args.out or cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    path = out / "landscape.csv"
    save_landscape(land, path)
    lo, hi = land.fitness_range
    print(f"L={land.length} sequences={land.size} fitness_range=[{lo:.6g}, {hi:.6g}] -> {path}")
    return 0


def cmd_run(args):
    overrides = {
        "seed": args.seed, "out": args.out, "alpha": args.alpha, "grid": args.grid,
        "trials": args.trials, "noise_scale": args.noise_scale, "gamma": args.gamma,
        "n_calib": args.n_calib, "reference_id": args.reference_id,
        "methods": args.method.split(",") if args.method else None,
        "lambda": _floats(args.lam) if args.lam else None,
        "n": _ints(args.n) if args.n else None,
    }
    cfg = load_config(args.config, overrides)
    if args.landscape:
        cfg["landscape"] = {"path": args.landscape,
                            "feature_order": cfg["landscape"].get("feature_order", 2)}
    land = build_landscape(cfg["landscape"])
    configs = list(trial_configs(cfg))
    ref = cfg["reference_id"]
    ref_fit = float(land.fitness[int(ref)]) if ref is not None else None

    records = []
    for tc in configs:
        records.extend(run_trials(tc, land, methods=cfg["methods"]))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_records(out / "records.csv", records)
    summaries = metrics.summarize_sweep(records, land.fitness_range, ref_fit)
    write_summaries(out / "summary.csv", summaries)
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for s in summaries:
        print(f"n={s.n} lambda={s.lam:g} {s.method}: coverage={s.coverage:.3f} "
              f"mean_width={s.mean_width:.4g} frac_infinite={s.frac_infinite:.3f}")
    return 0


def cmd_report(args):
    records = []
    for p in args.records:
        records.extend(read_records(p))
    if not records:
        raise ConfigError("no records found")
    out = Path(args.out or "report")
    out.mkdir(parents=True, exist_ok=True)

    summaries = metrics.summarize_sweep(records)
    rows = []
    for (n, method), group in itertools.groupby(sorted(summaries, key=lambda s: (s.n, s.method)),
                                                key=lambda s: (s.n, s.method)):
        for lam, pred, width, frac_inf in metrics.tradeoff_curve(group):
            rows.append([method, n, lam, pred, width, frac_inf])
    write_table(out / "tradeoff.csv", "tradeoff",
                ["method", "n", "lambda", "mean_predicted", "mean_width", "frac_infinite"], rows)
    written = [out / "tradeoff.csv"]

    by_key = {}
    for r in records:
        if r.method in GRID_METHODS:
            by_key.setdefault((r.n, r.lam, r.trial), {})[r.method] = r
    methods = sorted({m for d in by_key.values() for m in d})
    if len(methods) >= 2:
        jrows = []
        for a, b in itertools.combinations(methods, 2):
            for (n, lam, trial), d in sorted(by_key.items()):
                if a in d and b in d:
                    try:
                        jd = metrics.jaccard_distance(d[a].conf_set, d[b].conf_set)
                    except ValueError as exc:
                        raise ConfigError(f"incompatible records for trial {trial}: {exc}") from None
                    jrows.append([a, b, n, lam, trial, jd])
        write_table(out / "jaccard.csv", "jaccard",
                    ["method_a", "method_b", "n", "lambda", "trial", "jaccard"], jrows)
        written.append(out / "jaccard.csv")
    for p in written:
        print(p)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="fcsconf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    lp = sub.add_parser("landscape", help="write a synthetic landscape CSV")
    lp.add_argument("--config")
    lp.add_argument("--length", "-L", type=int)
    lp.add_argument("--max-order", type=int)
    lp.add_argument("--coeff-sd", help="comma-separated sd per interaction order")
    lp.add_argument("--noise-sd", type=float)
    lp.add_argument("--seed", type=int)
    lp.add_argument("--out")
    lp.set_defaults(func=cmd_landscape)

    rp = sub.add_parser("run", help="run design trials and write records/summary CSVs")
    rp.add_argument("--config")
    rp.add_argument("--landscape", help="landscape CSV (overrides the config)")
    rp.add_argument("--seed", type=int)
    rp.add_argument("--out")
    rp.add_argument("--method", help=f"comma-separated subset of {','.join(METHODS)}")
    rp.add_argument("--lambda", dest="lam", help="comma-separated inverse temperatures")
    rp.add_argument("--n", help="comma-separated training sizes")
    rp.add_argument("--alpha", type=float)
    rp.add_argument("--grid", help="LO:HI:STEP (write --grid=-1:1:0.1 when LO is negative)")
    rp.add_argument("--trials", type=int)
    rp.add_argument("--noise-scale", type=float)
    rp.add_argument("--gamma", type=float)
    rp.add_argument("--n-calib", type=int)
    rp.add_argument("--reference-id", type=int)
    rp.set_defaults(func=cmd_run)

    qp = sub.add_parser("report", help="trade-off and Jaccard tables from records CSVs")
    qp.add_argument("records", nargs="+")
    qp.add_argument("--out")
    qp.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except TrialError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, LandscapeFormatError, TableError, ValueError, KeyError, TypeError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
