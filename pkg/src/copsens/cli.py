"""Command-line harness: simulate / fit / sweep / bounds / report.

All commands are deterministic given their seed.  Datasets travel as
two-column CSV (header ``a,y``); every JSON output embeds the seed and a
hash of the effective configuration.  Exit codes: 0 success, 2 usage or
configuration error, 3 data error, 4 numerical failure.
"""

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .causal import DEFAULT_RHO_GRID, sweep_rho_curve
from .data import Dataset, VarSchema, read_csv, write_csv
from .dgp import (
    BinaryDgpParams,
    CategoricalDgpParams,
    LinearScmParams,
    af_bounds,
    categorical_af_bounds,
    categorical_exact_bounds,
    dgp_from_dict,
    empirical_obs_stats,
    exact_obs_stats,
    sample_categorical_dgp,
    sample_dgp,
    true_ace,
)
from .errors import (
    DegenerateCopulaError,
    DivergedFitError,
    InvalidInputError,
    InversionError,
    SchemaError,
    SweepError,
)
from .training import TrainConfig, fit
from .transforms import params_to_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(args) -> Path:
    base = args.out_dir or os.environ.get("COPSENS_OUT_DIR") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _apply_config_defaults(args, argv):
    """Overlay --config file values onto flags not explicitly given.

    Config keys mirror the long option names (with - or _); values use
    JSON types.  Flags passed on the command line always win.
    """
    if not getattr(args, "config", None):
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise InvalidInputError("config file must hold a JSON object")
    explicit = set()
    for tok in argv:
        if tok.startswith("--"):
            explicit.add(tok[2:].split("=", 1)[0].replace("-", "_"))
    for key, value in doc.items():
        attr = str(key).replace("-", "_")
        if attr in explicit or attr == "config":
            continue
        if hasattr(args, attr):
            setattr(args, attr, value)


def _add_train_flags(p):
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=3e-4)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--split", default="0.8,0.1,0.1",
                   help="train,val,test weights")
    p.add_argument("--n-bins", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)


def _add_schema_flags(p):
    p.add_argument("--schema-a", default=None,
                   help="'continuous' or 'discrete:K' (default: sidecar or continuous)")
    p.add_argument("--schema-y", default=None)
    p.add_argument("--meta", default=None,
                   help="sidecar metadata JSON (schemas default from it)")


def _train_config(args) -> TrainConfig:
    split = tuple(float(x) for x in str(args.split).split(","))
    return TrainConfig(
        rho=getattr(args, "rho", 0.0),
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
        patience=args.patience,
        split_ratio=split,
        seed=args.seed,
        n_bins=args.n_bins,
    )


def _load_dataset(args) -> Dataset:
    a, y = read_csv(args.data)
    meta_path = args.meta
    if meta_path is None:
        guess = Path(str(args.data)).with_suffix(".meta.json")
        if guess.exists():
            meta_path = guess
    schema_a = schema_y = None
    if meta_path is not None:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        schema = meta.get("schema", {})
        if "a" in schema:
            schema_a = VarSchema.parse(schema["a"])
        if "y" in schema:
            schema_y = VarSchema.parse(schema["y"])
    if args.schema_a:
        schema_a = VarSchema.parse(args.schema_a)
    if args.schema_y:
        schema_y = VarSchema.parse(args.schema_y)
    return Dataset(a, y,
                   a_schema=schema_a or VarSchema("continuous"),
                   y_schema=schema_y or VarSchema("continuous"))


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> int:
    with open(args.dgp, "r", encoding="utf-8") as fh:
        spec_doc = json.load(fh)
    dgp = dgp_from_dict(spec_doc)
    if args.n < 1:
        raise InvalidInputError("-n must be positive")

    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)

    meta = {
        "command": "simulate",
        "version": __version__,
        "seed": args.seed,
        "n": args.n,
        "dgp": spec_doc,
        "true_ace": true_ace(dgp),
    }
    if isinstance(dgp, LinearScmParams):
        meta["schema"] = {"a": "continuous", "y": "continuous"}
        meta["rho_true"] = dgp.rho_noise
        meta["rho_obs"] = dgp.rho_obs
        a, y = sample_dgp(dgp, args.n, rng)
    elif isinstance(dgp, BinaryDgpParams):
        meta["schema"] = {"a": "discrete:2", "y": "discrete:2"}
        meta["af_bounds"] = list(af_bounds(exact_obs_stats(dgp)))
        a, y = sample_dgp(dgp, args.n, rng)
    elif isinstance(dgp, CategoricalDgpParams):
        meta["schema"] = {"a": "discrete:2", "y": f"discrete:{dgp.n_classes}"}
        meta["af_bounds"] = list(categorical_exact_bounds(dgp))
        a, y, dims = sample_categorical_dgp(dgp, args.n, rng, return_dimensions=True)
        dims_path = out.with_suffix(".dims.csv")
        header = "a," + ",".join(f"d{i}" for i in range(dims.shape[1]))
        with open(dims_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for ai, row in zip(a, dims):
                fh.write(f"{ai:.17g}," + ",".join(str(int(v)) for v in row) + "\n")
        meta["dimensions_csv"] = str(dims_path)
    else:
        raise InvalidInputError("unsupported DGP kind")

    write_csv(out, a, y)
    meta["config_sha256"] = _config_hash(
        {"dgp": spec_doc, "n": args.n, "seed": args.seed}
    )
    _write_json(out.with_suffix(".meta.json"), meta)
    print(f"wrote {out} ({args.n} rows) and {out.with_suffix('.meta.json')}")
    return EXIT_OK


def cmd_fit(args) -> int:
    ds = _load_dataset(args)
    config = _train_config(args)
    enc_rng = np.random.default_rng(config.seed)
    a_enc, y_enc = ds.encoded(enc_rng)
    report = fit((a_enc, y_enc), config)

    out = _out_dir(args)
    cfg_doc = config.to_dict()
    cfg_doc["schema"] = {"a": str(ds.a_schema), "y": str(ds.y_schema)}
    digest = _config_hash(cfg_doc)

    doc = report.to_dict()
    doc.update({
        "command": "fit",
        "version": __version__,
        "seed": config.seed,
        "rho": config.rho,
        "config": cfg_doc,
        "config_sha256": digest,
        "activation": report.final_params.hyper.activation,
    })
    _write_json(out / "fit_report.json", doc)
    with open(out / "params.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(params_to_json(report.final_params))
        fh.write("\n")
    print(f"fit: rho={config.rho} test_nll={report.test_nll:.6f} "
          f"best_epoch={report.best_epoch} -> {out / 'fit_report.json'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    ds = _load_dataset(args)
    config = _train_config(args)
    grid = [float(x) for x in str(args.grid).split(",")]
    curve = sweep_rho_curve(
        ds, grid=grid, config=config, n_samples=args.n_samples,
        a1=args.a1, a0=args.a0, n_jobs=args.jobs,
    )

    out = _out_dir(args)
    cfg_doc = config.to_dict()
    cfg_doc.update({
        "grid": grid, "n_samples": args.n_samples,
        "a1": args.a1, "a0": args.a0,
        "schema": {"a": str(ds.a_schema), "y": str(ds.y_schema)},
    })
    doc = curve.to_dict()
    doc.update({
        "command": "sweep",
        "version": __version__,
        "seed": config.seed,
        "config": cfg_doc,
        "config_sha256": _config_hash(cfg_doc),
    })
    _write_json(out / "rho_curve.json", doc)
    with open(out / "rho_curve.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(curve.to_csv_text())
    print(f"sweep: bounds=[{curve.bounds[0]:.4f}, {curve.bounds[1]:.4f}] "
          f"intercept={curve.rho_value_intercept} "
          f"closed_form={curve.rho_value_closed:.4f} -> {out / 'rho_curve.json'}")
    return EXIT_OK


def _read_header(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.readline().strip()


def cmd_bounds(args) -> int:
    header = _read_header(args.data)
    out_doc = {"command": "bounds", "version": __version__, "data": str(args.data)}
    if header == "a,y":
        a, y = read_csv(args.data)
        if not (np.isin(a, (0.0, 1.0)).all() and np.isin(y, (0.0, 1.0)).all()):
            raise SchemaError("bounds requires binary 0/1 columns "
                              "(or a multi-dimension file with header a,d0,...)")
        stats = empirical_obs_stats(a, y)
        lo, hi = af_bounds(stats)
        out_doc.update({
            "kind": "binary",
            "stats": {"p1": stats.p1, "p0": stats.p0,
                      "q1": stats.q1, "q0": stats.q0},
            "af_bounds": [lo, hi],
            "width": hi - lo,
        })
    else:
        cols = header.split(",")
        if cols[0] != "a" or len(cols) < 2:
            raise SchemaError(f"unrecognized header {header!r}")
        raw = np.loadtxt(args.data, delimiter=",", skiprows=1)
        if raw.ndim == 1:
            raw = raw[None, :]
        if raw.shape[1] != len(cols):
            raise SchemaError("row width does not match header")
        a = raw[:, 0]
        if not np.isin(raw, (0.0, 1.0)).all():
            raise SchemaError("bounds requires binary 0/1 columns")
        per_dim = []
        for j in range(1, raw.shape[1]):
            stats = empirical_obs_stats(a, raw[:, j])
            per_dim.append({"name": cols[j], "stats": {
                "p1": stats.p1, "p0": stats.p0, "q1": stats.q1, "q0": stats.q0},
                "af_bounds": list(af_bounds(stats))})
        lo, hi = categorical_af_bounds(
            [tuple(d["af_bounds"]) for d in per_dim]
        )
        out_doc.update({
            "kind": "categorical",
            "dimensions": per_dim,
            "af_bounds": [lo, hi],
            "width": hi - lo,
        })
    out_doc["config_sha256"] = _config_hash({"data": str(args.data)})
    if args.out:
        _write_json(args.out, out_doc)
        print(f"bounds: [{out_doc['af_bounds'][0]:.4f}, "
              f"{out_doc['af_bounds'][1]:.4f}] -> {args.out}")
    else:
        json.dump(out_doc, sys.stdout, indent=2, sort_keys=True)
        print()
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    summary = []
    for path in args.curves:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        label = Path(path).stem
        for p in doc["points"]:
            rows.append((label, p["rho"], p["ace"], p["ey1"], p["ey0"]))
        summary.append({
            "label": label,
            "bounds": doc["bounds"],
            "rho_value_closed": doc["rho_value_closed"],
            "rho_value_intercept": doc["rho_value_intercept"],
        })
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("label,rho,ace,ey1,ey0\n")
        for label, rho, ace, ey1, ey0 in rows:
            fh.write(f"{label},{rho:.17g},{ace:.17g},{ey1:.17g},{ey0:.17g}\n")
    _write_json(out.with_suffix(".summary.json"), {
        "command": "report",
        "version": __version__,
        "curves": summary,
        "config_sha256": _config_hash({"curves": [str(c) for c in args.curves]}),
    })
    print(f"report: {len(rows)} rows from {len(args.curves)} curves -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copsens",
        description="Copula-flow sensitivity analysis for causal effects",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a dataset from a DGP spec")
    p.add_argument("--config", help="JSON file of flag defaults")
    p.add_argument("--dgp", required=True, help="DGP spec JSON file")
    p.add_argument("-n", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit the model at one rho")
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--rho", type=float, required=True)
    _add_schema_flags(p)
    _add_train_flags(p)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="fit along a rho grid, emit the curve")
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", default=",".join(str(g) for g in DEFAULT_RHO_GRID))
    p.add_argument("--n-samples", type=int, default=100_000)
    p.add_argument("--a1", type=float, default=1.0)
    p.add_argument("--a0", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1)
    _add_schema_flags(p)
    _add_train_flags(p)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="assumption-free bounds from binary data")
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("report", help="merge sweep outputs into one table")
    p.add_argument("--config")
    p.add_argument("curves", nargs="+", help="rho_curve.json files")
    p.add_argument("--out", required=True, help="merged CSV path")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_defaults(args, argv)
        return args.func(args)
    except (SchemaError, FileNotFoundError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DivergedFitError, InversionError, SweepError,
            DegenerateCopulaError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInputError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
