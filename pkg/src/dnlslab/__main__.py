"""Command line entry point: python -m dnlslab <subcommand> [flags]."""

from __future__ import annotations

import argparse
import json
import sys

from . import lab

SUBCOMMANDS = {
    "audit-spectral": "spectral-audit",
    "stability-single": "single",
    "stability-pair": "pair",
    "monotone": "monotone",
    "soliton-table": "soliton-table",
}


def _parse_set(items):
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dnlslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="seed of the random-smooth perturbation")
        p.add_argument("--force", action="store_true",
                       help="run pairs that fail the speed conditions")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config key (value parsed as JSON)")
    acc = sub.add_parser("acceptance", help="run one acceptance check")
    acc.add_argument("criterion", type=int, choices=range(1, 13))
    return parser


def config_for(command: str, args) -> lab.ExperimentConfig:
    kind = SUBCOMMANDS[command]
    data = dict(lab.PRESETS[kind])
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    data.update(_parse_set(args.set))
    if args.out is not None:
        data["out"] = args.out
    if args.seed is not None:
        data["seed"] = args.seed
    if args.force:
        data["force"] = True
    data["kind"] = kind
    return lab.ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "acceptance":
        from . import acceptance
        result = acceptance.run_criterion(args.criterion)
        print(result.line())
        return 0 if result.passed else 1
    cfg = config_for(args.command, args)
    report = lab.run(cfg)
    lab.write_report(report, cfg.out)
    for key, ok in report.pass_fail.items():
        print(f"{'PASS' if ok else 'FAIL'} {key}")
    print(f"wrote {len(report.files)} files to {cfg.out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
