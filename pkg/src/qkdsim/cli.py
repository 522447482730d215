"""Command-line entry points.

Exit codes: 0 success, 2 validation error (bad file, bad argument,
malformed scenario), 3 calibration failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from qkdsim.errors import (
    CalibrationError,
    DomainError,
    InvalidArgumentError,
    QkdSimError,
    ValidationError,
)
from qkdsim.chain.demo import run_demo
from qkdsim.physmodel.calibrate import QberAnchor, calibrate, parse_anchors_file, uniform_plan
from qkdsim.physmodel.model import link_observables
from qkdsim.physmodel.types import FiberSpan, params_from_text, params_to_text
from qkdsim.scenario.engine import read_csv, run, write_csv
from qkdsim.scenario.report import report
from qkdsim.scenario.schema import load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CALIBRATION = 3

DEFAULT_QBER_ANCHORS = ("2:0.0394", "10:0.0414")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdsim",
        description="Calibrated QKD link simulator and key-delivery stack",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and write its CSV log")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--params", help="model parameters file")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    p_report = sub.add_parser("report", help="summarize a run log")
    p_report.add_argument("log", help="CSV log written by `qkdsim run`")
    p_report.add_argument(
        "--kind",
        required=True,
        choices=(
            "qber_vs_channels",
            "skr_vs_distance",
            "attenuation_profile",
            "sop_timeline",
        ),
    )

    p_cal = sub.add_parser("calibrate", help="fit model parameters to anchors")
    p_cal.add_argument("--anchors", required=True, help="anchors text file")
    p_cal.add_argument("--out", required=True, help="output parameters file")
    p_cal.add_argument(
        "--qber-anchor",
        action="append",
        metavar="COUNT:QBER",
        help="QBER anchor as channel_count:qber "
        f"(repeatable; default {' and '.join(DEFAULT_QBER_ANCHORS)})",
    )

    p_demo = sub.add_parser("chain-demo", help="run the consensus transport demo")
    p_demo.add_argument("--nodes", type=int, required=True, help="validator count")
    p_demo.add_argument("--k", type=int, required=True, help="reconstruction threshold")
    p_demo.add_argument("--tamper", default="none", help="share index to corrupt, or 'none'")
    p_demo.add_argument("--seed", type=int, default=0)

    return parser


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {what} {path}: {exc}") from exc


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    params_path = args.params
    if params_path is None and scenario.params_file is not None:
        params_path = str(Path(args.scenario).parent / scenario.params_file)
    if params_path is None:
        raise ValidationError(
            "no parameters: pass --params or set params_file in the scenario"
        )
    params = params_from_text(_read_text(params_path, "params file"))
    log = run(scenario, params)
    try:
        write_csv(log, args.out)
    except OSError as exc:
        raise ValidationError(f"cannot write log {args.out}: {exc}") from exc
    print(f"wrote {args.out} ({len(log.rows)} rows)")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    log = read_csv(args.log)
    table = report(log, args.kind)
    sys.stdout.write(table.render())
    return EXIT_OK


def _parse_qber_anchor(text: str) -> QberAnchor:
    count_s, _, qber_s = text.partition(":")
    try:
        count = int(count_s)
        value = float(qber_s)
    except ValueError as exc:
        raise ValidationError(
            f"bad QBER anchor {text!r}, expected channel_count:qber"
        ) from exc
    return QberAnchor(uniform_plan(count), value)


def _cmd_calibrate(args: argparse.Namespace) -> int:
    skr_anchors = parse_anchors_file(_read_text(args.anchors, "anchors file"))
    specs = args.qber_anchor if args.qber_anchor else list(DEFAULT_QBER_ANCHORS)
    qber_anchors = [_parse_qber_anchor(s) for s in specs]
    params = calibrate(skr_anchors, qber_anchors)
    text = params_to_text(params)
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        raise ValidationError(f"cannot write params {args.out}: {exc}") from exc
    print(f"wrote {args.out}")
    for anchor in skr_anchors:
        span = FiberSpan(anchor.distance_km)
        _, model_skr = link_observables(anchor.plan, span, params)
        rel = (model_skr - anchor.measured_skr_bps) / anchor.measured_skr_bps
        print(
            f"  {anchor.distance_km:g} km, {len(anchor.plan.channels)} ch: "
            f"model {model_skr:.6g} bps vs measured {anchor.measured_skr_bps:.6g} "
            f"({rel:+.2%})"
        )
    base = min(a.distance_km for a in skr_anchors)
    for anchor in qber_anchors:
        d = anchor.distance_km if anchor.distance_km is not None else base
        model_qber, _ = link_observables(anchor.plan, FiberSpan(d), params)
        print(
            f"  {len(anchor.plan.channels)} ch at {d:g} km: "
            f"model qber {model_qber:.6g} vs measured {anchor.measured_qber:.6g}"
        )
    return EXIT_OK


def _cmd_chain_demo(args: argparse.Namespace) -> int:
    if args.tamper == "none":
        tamper = None
    else:
        try:
            tamper = int(args.tamper)
        except ValueError as exc:
            raise ValidationError(
                f"--tamper must be a share index or 'none', got {args.tamper!r}"
            ) from exc
    transcript = run_demo(args.nodes, args.k, tamper, args.seed)
    sys.stdout.write(transcript)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "report": _cmd_report,
        "calibrate": _cmd_calibrate,
        "chain-demo": _cmd_chain_demo,
    }
    try:
        return handlers[args.command](args)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (ValidationError, InvalidArgumentError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QkdSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
