"""Command-line entry point: ``csiratio {simulate,estimate,verify-model}``.

On failure the process exits non-zero and prints one JSON error record on
stderr: ``{"error": <code>, "message": ..., "line": ...}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

from .config import RunConfig
from .exceptions import CsiRatioError
from .io import read_csi_record, sidecar_path, write_csi_record, write_results, write_truth
from .rate import estimate_rate
from .simulate import synthesize
from .verify import verify_model

log = logging.getLogger("csiratio")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    return cfg.with_overrides(
        theta_step=getattr(args, "theta_step", None),
        gate=getattr(args, "gate", None),
        band=getattr(args, "band", None),
    )


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    sim = cfg.simulation
    if args.duration is not None:
        sim = replace(sim, duration=args.duration)
    scene = sim.scene(seed=args.seed)
    stream, truth = synthesize(scene, sim.duration, sim.events(), seed=args.seed)
    write_csi_record(args.out, stream)
    truth_path = sidecar_path(args.out)
    write_truth(truth_path, truth)
    log.info("wrote %d frames to %s and ground truth to %s", len(stream), args.out, truth_path)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _load_config(args)
    stream = read_csi_record(args.input)
    # the record's own rate wins over the config
    estimates = estimate_rate(stream, replace(cfg.estimator, sample_rate=stream.sample_rate))
    with _output(args.out) as f:
        n = write_results(f, estimates)
    log.info("wrote %d window records", n)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    report = verify_model(cfg.verify, seed=args.seed)
    with _output(args.out) as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    for c in report["checks"]:
        log.info("%-4s %-13s %s", c["prop"], c["status"], c["name"])
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def _band(text):
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("band must be 'MIN,MAX' in bpm")
    return tuple(float(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csiratio", description="CSI-ratio respiration sensing toolkit")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--theta-step", type=float, help="projection angle step (radians)")
        p.add_argument("--gate", type=float, help="subcarrier gate as a fraction of the best BNR")
        p.add_argument("--band", type=_band, help="respiration band 'MIN,MAX' in bpm")

    p = sub.add_parser("simulate", help="synthesize a CSI record and its ground truth")
    p.add_argument("--config", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, help="seconds; overrides the config")
    p.add_argument("--out", required=True, help="record path (.csv or .csv.gz)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate respiration rate per window")
    p.add_argument("--in", dest="input", required=True, help="record path")
    p.add_argument("--config", type=Path)
    p.add_argument("--out", default="-", help="JSON-lines output ('-' for stdout)")
    overrides(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify-model", help="check circle, orientation and arc properties")
    p.add_argument("--config", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="JSON report path ('-' for stdout)")
    p.set_defaults(func=cmd_verify)
    return parser


def _error_record(exc: BaseException) -> dict:
    rec = {"error": getattr(exc, "code", type(exc).__name__), "message": str(exc)}
    if getattr(exc, "line", None) is not None:
        rec["line"] = exc.line
    return rec


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK
    except (CsiRatioError, OSError, ValueError) as exc:
        sys.stderr.write(json.dumps(_error_record(exc)) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
