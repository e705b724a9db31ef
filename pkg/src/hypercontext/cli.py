"""Command-line entry point: ``scenario``, ``simulate``, ``certify``, ``verify``.

Exit codes: 0 success / noncontextual / realization verified, 1 contextual /
realization rejected, 2 invalid input, 64 usage error, 74 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .behaviors import BehaviorError, behavior_from_json
from .device import (
    CONTEXTUAL, OVERLAPPED, DeviceConfigError, default_device, device_from_json, estimate_and_certify,
    joint_schedule, overlapped_device, run_experiment, sequential_schedule, single_schedule, trial_records,
)
from .polytope import cycle_inequality, decide_noncontextual, evaluate_inequality
from .realizations import (
    DEFAULT_TOLERANCE, DimensionMismatch, RealizationError, classical_from_json, quantum_from_json,
    verify_classical, verify_quantum,
)
from .scenario import Issue, ScenarioValidationError, build_n_cycle, cycle_length, validate_scenario
from ._rational import format_fraction

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 74


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    inputs: list[str]
    seed: int | None
    trials: int | None
    tool_version: str
    timestamp: str
    outputs: dict[str, str] = field(default_factory=dict)  # file name -> sha256

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "RunManifest":
        return cls(**doc)


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
           else _dt.datetime.now(_dt.timezone.utc))
    return now.replace(microsecond=0).isoformat()


def _dump(doc, fmt: str) -> str:
    if fmt == "pretty":
        return json.dumps(doc, indent=2, ensure_ascii=False)
    return json.dumps(doc, ensure_ascii=False, sort_keys=False)


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _issues_out(issues, fmt):
    print(_dump([i.to_json() for i in issues], fmt))
    return EXIT_INVALID


def cmd_scenario(args) -> int:
    try:
        if args.cycle is not None:
            scenario = build_n_cycle(args.cycle)
        else:
            scenario = validate_scenario(_load_json(args.file))
    except ScenarioValidationError as exc:
        return _issues_out(exc.issues, args.format)
    except (OSError, json.JSONDecodeError) as exc:
        return _issues_out([Issue("Unreadable", str(exc))], args.format)
    print(_dump(scenario.to_json(), args.format))
    return EXIT_OK


_SCHEDULES = {
    CONTEXTUAL: joint_schedule,
    OVERLAPPED: joint_schedule,
    "sequential": sequential_schedule,
    "single": single_schedule,
}


def cmd_simulate(args) -> int:
    inputs = []
    try:
        if args.config:
            device = device_from_json(_load_json(args.config))
            inputs.append(args.config)
            if args.mode in (CONTEXTUAL, OVERLAPPED) and device.mode != args.mode:
                raise DeviceConfigError(f"--mode {args.mode} but the config is in {device.mode} mode")
        elif args.mode == OVERLAPPED:
            device = overlapped_device(args.window)
        else:
            device = default_device()
    except (OSError, json.JSONDecodeError, DeviceConfigError) as exc:
        print(f"invalid device configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.trials < 1:
        print("--trials must be positive", file=sys.stderr)
        return EXIT_USAGE

    seed = args.seed
    schedule = _SCHEDULES[args.mode](device)
    empirical = run_experiment(device, schedule, seed, args.trials)
    out = Path(args.output)
    manifest = RunManifest("simulate", inputs, seed, args.trials, __version__, _timestamp())
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        behavior_doc = empirical.to_json()
        behavior_doc["manifest"] = "manifest.json"
        files["behavior.json"] = (_dump(behavior_doc, "pretty") + "\n").encode()
        files["device.json"] = (_dump(device.to_json(), "pretty") + "\n").encode()
        for name, data in files.items():
            (out / name).write_bytes(data)
            manifest.outputs[name] = hashlib.sha256(data).hexdigest()
        if not args.no_log:
            digest = hashlib.sha256()
            with open(out / "trials.jsonl", "wb") as fh:
                for rec in trial_records(device, schedule, seed, args.trials):
                    line = (json.dumps(rec.to_json(), ensure_ascii=False) + "\n").encode()
                    digest.update(line)
                    fh.write(line)
            manifest.outputs["trials.jsonl"] = digest.hexdigest()
        (out / "manifest.json").write_text(_dump(manifest.to_json(), "pretty") + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO

    summary = {"mode": args.mode, "output": str(out), "files": sorted(manifest.outputs)}
    if empirical.joint and len(empirical.joint) == len(device.scenario.contexts):
        report = estimate_and_certify(empirical)
        summary["analysis"] = report.to_json()
    print(_dump(summary, args.format))
    return EXIT_OK


def cmd_certify(args) -> int:
    try:
        behavior = behavior_from_json(_load_json(args.behavior))
    except (OSError, json.JSONDecodeError, BehaviorError, ScenarioValidationError, KeyError) as exc:
        print(f"malformed behavior: {exc}", file=sys.stderr)
        return EXIT_INVALID
    decision = decide_noncontextual(behavior)
    doc = decision.to_json()
    n = cycle_length(behavior.scenario)
    if n is not None:
        ev = evaluate_inequality(behavior, cycle_inequality(n))
        doc["cycle_correlation"] = {"n": n, "value": format_fraction(ev.value),
                                    "bound": format_fraction(ev.bound), "satisfied": ev.satisfied}
    print(_dump(doc, args.format))
    line = f"verdict: {decision.verdict}"
    if not decision.noncontextual:
        line += f" (certificate value {decision.value} < bound {decision.bound})"
    if n is not None:
        line += f"; {n}-cycle correlation sum {ev.value} vs classical bound {ev.bound}"
    print(line, file=sys.stderr)
    return EXIT_OK if decision.noncontextual else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        behavior = behavior_from_json(_load_json(args.behavior))
        doc = _load_json(args.realization)
        if args.kind == "classical":
            report = verify_classical(classical_from_json(doc, behavior.scenario), behavior)
        else:
            realization = quantum_from_json(doc, behavior.scenario)
            report = verify_quantum(realization, behavior, args.tolerance)
    except (OSError, json.JSONDecodeError, BehaviorError, ScenarioValidationError, RealizationError,
            DimensionMismatch, ValueError, KeyError, TypeError, AttributeError) as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = {"ok": report.ok, "failed_condition": report.failed_condition,
              "first_discrepancy": repr(report.discrepancies[0]) if report.discrepancies else None}
    print(_dump(result, args.format))
    print(report.summary(), file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (u64)")
    common.add_argument("--output", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--format", choices=("json", "pretty"), default=argparse.SUPPRESS)

    parser = _Parser(prog="hypercontext", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", default=".")
    parser.add_argument("--format", choices=("json", "pretty"), default="json")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", parents=[common], help="emit a validated scenario")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--cycle", type=int)
    g.add_argument("--file")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("simulate", parents=[common], help="run the decagon device")
    p.add_argument("--config", help="device configuration JSON (default: built-in device)")
    p.add_argument("--mode", choices=tuple(_SCHEDULES), default=CONTEXTUAL)
    p.add_argument("--trials", type=int, default=100_000, help="trials per press")
    p.add_argument("--window", type=int, default=0, help="overlapped detector start slot")
    p.add_argument("--no-log", action="store_true", help="skip the per-trial JSON-lines log")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", parents=[common], help="decide noncontextuality of a behavior")
    p.add_argument("behavior")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", parents=[common], help="check a realization against a behavior")
    p.add_argument("--behavior", required=True)
    p.add_argument("--realization", required=True)
    p.add_argument("--kind", choices=("classical", "quantum"), default="classical")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
