"""Command-line front door: fit, predict, report, serve.

Exit codes are part of the contract:

    0  success
    2  user or validation error (bad flags, bad data, schema mismatch)
    3  model did not converge (and --allow-unconverged was not given)
    4  environment error (I/O failure, port bind failure)

Every command is deterministic given its files and flags; anything
stochastic sits behind --seed.
"""

from __future__ import annotations

import argparse
import csv
import math
import socket
import sys

from . import jsonio
from .design import read_csv
from .errors import (
    IoFailure,
    NeffkitError,
    NotConverged,
)
from .fit import FittedModel
from .jsonio import format_float
from .report import DEFAULT_THRESHOLDS, emit_plot_data
from .store import load, save
from .workflow import fit_model, predict_record, validation_report

DEFAULT_SEED = 20240101

EXIT_OK = 0
EXIT_USER = 2
EXIT_NOT_CONVERGED = 3
EXIT_ENVIRONMENT = 4


def _split_names(values: list[str] | None) -> list[str]:
    """Flatten repeatable, comma-separated name flags."""
    names: list[str] = []
    for chunk in values or []:
        names.extend(n.strip() for n in chunk.split(",") if n.strip())
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neffkit",
        description=(
            "Fit prediction models and report per-patient effective sample "
            "sizes (how many identical patients the model's certainty is worth)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model from a CSV and write a model file")
    p_fit.add_argument("--data", required=True, help="development CSV (header row required)")
    p_fit.add_argument("--outcome", required=True, help="outcome column name")
    p_fit.add_argument(
        "--family",
        required=True,
        choices=["gaussian", "binomial", "poisson"],
        help="model family (identity, logit, and log links respectively)",
    )
    p_fit.add_argument(
        "--predictors",
        required=True,
        action="append",
        help="covariate column names, comma-separated (flag may repeat)",
    )
    p_fit.add_argument("--model", required=True, help="output model file (JSON)")
    p_fit.add_argument(
        "--center",
        choices=["none", "auto"],
        default="none",
        help="auto = center continuous covariates at their marginal means",
    )
    p_fit.add_argument(
        "--binary",
        action="append",
        help="force these covariates to be treated as binary toggles",
    )
    p_fit.add_argument(
        "--continuous",
        action="append",
        help="force these covariates to be treated as continuous",
    )
    p_fit.add_argument(
        "--threshold",
        action="append",
        type=float,
        help="n_eff thresholds to count below (default: 30; flag may repeat)",
    )
    p_fit.add_argument("--model-name", help="label stored in the model file")
    p_fit.add_argument(
        "--allow-unconverged",
        action="store_true",
        help="persist the last iterate even if the fit did not converge",
    )
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="score patients against a saved model")
    p_pred.add_argument("--model", required=True, help="model file from `fit`")
    p_pred.add_argument("--input", help="CSV of patients to score")
    p_pred.add_argument(
        "--set",
        action="append",
        metavar="NAME=VALUE",
        help="one covariate value (repeat for each covariate) for a single patient",
    )
    p_pred.add_argument("--output", help="output CSV path (default: stdout)")
    p_pred.add_argument(
        "--keep-going",
        action="store_true",
        help="on a bad input row, write an error column and continue",
    )
    p_pred.set_defaults(func=cmd_predict)

    p_rep = sub.add_parser("report", help="dev/validation n_eff distribution report")
    p_rep.add_argument("--model", required=True)
    p_rep.add_argument("--data", help="validation CSV; omit for a dev-only summary")
    p_rep.add_argument("--output", required=True, help="report JSON path")
    p_rep.add_argument(
        "--threshold",
        action="append",
        type=float,
        help="override the model's n_eff thresholds",
    )
    p_rep.add_argument(
        "--plot-data",
        action="append",
        metavar="KIND=PATH",
        help=(
            "emit plot CSV (kinds: neff-vs-p, dev-val-density, histogram); "
            "flag may repeat"
        ),
    )
    p_rep.set_defaults(func=cmd_report)

    p_srv = sub.add_parser("serve", help="serve the HTTP API (and optionally the UI)")
    p_srv.add_argument("--model", required=True)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000, help="0 picks a free port")
    p_srv.add_argument("--static", help="directory of built UI assets to serve at /")
    p_srv.add_argument(
        "--cors-origin",
        action="append",
        help="additional allowed CORS origin (flag may repeat)",
    )
    p_srv.set_defaults(func=cmd_serve)

    for sp in (p_fit, p_pred, p_rep, p_srv):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed")
    return parser


def _print_fit_summary(model: FittedModel, out=None) -> None:
    out = out if out is not None else sys.stdout
    dist = model.dev_neff
    print(f"family:             {model.family.name}", file=out)
    print(f"rows (n):           {model.n_dev}", file=out)
    print(f"columns (p):        {model.p}", file=out)
    print(f"deviance:           {format_float(model.deviance)}", file=out)
    if not model.converged:
        print("converged:          no", file=out)
    for w in model.warnings:
        print(f"warning:            {w}", file=out)
    if dist is not None and model.dev_neff_sorted is not None:
        finite = model.dev_neff_sorted[: dist.n - dist.boundary_count]
        min_neff = float(finite[0]) if finite.size else math.inf
        print(f"dev n_eff harmonic mean: {format_float(dist.harmonic_mean)}", file=out)
        print(f"dev n_eff minimum:       {format_float(min_neff)}", file=out)
        for key, count in dist.n_below.items():
            print(f"dev rows with n_eff below {key}: {count} of {dist.n}", file=out)


def cmd_fit(args) -> int:
    predictors = _split_names(args.predictors)
    if not predictors:
        print("error: --predictors lists no covariates", file=sys.stderr)
        return EXIT_USER
    thresholds = tuple(args.threshold) if args.threshold else DEFAULT_THRESHOLDS
    model_name = args.model_name or _stem(args.model)
    data = read_csv(args.data, [args.outcome] + predictors)
    try:
        model = fit_model(
            data,
            outcome=args.outcome,
            predictors=predictors,
            family=args.family,
            center=args.center,
            binary=_split_names(args.binary),
            continuous=_split_names(args.continuous),
            thresholds=thresholds,
            model_name=model_name,
        )
    except NotConverged as err:
        if not (args.allow_unconverged and err.model is not None):
            print(f"error: {err}", file=sys.stderr)
            return EXIT_NOT_CONVERGED
        print(f"warning: {err}; keeping last iterate", file=sys.stderr)
        model = err.model
    save(model, args.model, allow_unconverged=args.allow_unconverged)
    _print_fit_summary(model)
    print(f"model written to {args.model}")
    return EXIT_OK


def _stem(path: str) -> str:
    import os

    return os.path.splitext(os.path.basename(path))[0]


PREDICT_COLUMNS = ["row_id", "yhat", "se_pred", "rel_var", "n_eff", "dev_percentile", "annotations"]


def _prediction_row(row_id: int, rec: dict) -> list[str]:
    def num(v):
        return "" if v is None else format_float(float(v))

    return [
        str(row_id),
        num(rec["yhat"]),
        num(rec["se_pred"]),
        num(rec["rel_var"]),
        num(rec["n_eff"]),
        num(rec["dev_percentile"]),
        ";".join(rec["annotations"]),
    ]


def _parse_set_flags(pairs: list[str]) -> dict[str, float]:
    record = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise ValueError(f"--set expects NAME=VALUE, got {pair!r}")
        try:
            record[name.strip()] = float(value)
        except ValueError:
            raise ValueError(f"--set {name}: {value!r} is not a number") from None
    return record


def cmd_predict(args) -> int:
    if bool(args.input) == bool(args.set):
        print("error: exactly one of --input or --set is required", file=sys.stderr)
        return EXIT_USER
    model = load(args.model)

    if args.set:
        record = _parse_set_flags(args.set)
        rec = predict_record(model, record)
        out = sys.stdout
        print(f"yhat:           {format_float(rec['yhat'])}", file=out)
        print(f"eta:            {format_float(rec['eta'])}", file=out)
        print(f"se_pred:        {format_float(rec['se_pred'])}", file=out)
        print(f"rel_var:        {format_float(rec['rel_var'])}", file=out)
        neff = "inf" if rec["n_eff"] is None else format_float(rec["n_eff"])
        print(f"n_eff:          {neff}", file=out)
        print(f"n_eff_display:  {rec['n_eff_display']}", file=out)
        if rec["dev_percentile"] is not None:
            print(f"dev_percentile: {format_float(rec['dev_percentile'])}", file=out)
        if rec["annotations"]:
            print(f"annotations:    {';'.join(rec['annotations'])}", file=out)
        return EXIT_OK

    names = model.design_spec.names
    data = read_csv(args.input, list(names))
    rows = []
    for i in range(data.n):
        record = {name: float(data.column(name)[i]) for name in names}
        try:
            rec = predict_record(model, record)
        except NeffkitError as err:
            if not args.keep_going:
                raise
            rows.append([str(i + 1), "", "", "", "", "", "", str(err)])
            continue
        row = _prediction_row(i + 1, rec)
        if args.keep_going:
            row.append("")
        rows.append(row)

    header = PREDICT_COLUMNS + (["error"] if args.keep_going else [])
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        print(f"predictions written to {args.output}")
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)
    return EXIT_OK


def cmd_report(args) -> int:
    model = load(args.model)
    data = read_csv(args.data, list(model.design_spec.names)) if args.data else None
    thresholds = tuple(args.threshold) if args.threshold else None
    bundle = validation_report(model, data, thresholds)
    payload = jsonio.dumps(bundle.to_obj(), indent=2) + "\n"
    try:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as err:
        raise IoFailure(f"could not write report {args.output}: {err}") from err
    print(f"report written to {args.output}")

    for spec in args.plot_data or []:
        kind, sep, path = spec.partition("=")
        if not sep:
            print(f"error: --plot-data expects KIND=PATH, got {spec!r}", file=sys.stderr)
            return EXIT_USER
        emit_plot_data(bundle, kind.strip(), path)
        print(f"plot data ({kind.strip()}) written to {path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app, mount_static

    model = load(args.model)
    app = create_app(model, cors_origins=args.cors_origin)
    if args.static:
        mount_static(app, args.static)

    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((args.host, args.port))
        sock.listen(128)
    except OSError as err:
        print(f"error: cannot bind {args.host}:{args.port}: {err}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    host, port = sock.getsockname()[:2]
    print(f"serving {model.model_name} on http://{host}:{port}", flush=True)

    config = uvicorn.Config(app, log_level="info", access_log=True)
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        # uvicorn replays the captured SIGINT after its graceful shutdown;
        # an interrupted server is a normal stop, not a failure.
        pass
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotConverged as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except IoFailure as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    except NeffkitError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_USER
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USER
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USER
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ENVIRONMENT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
