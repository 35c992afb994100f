"""``dtqw-lab`` command line: one subcommand per experiment plus ``sweep``."""

from __future__ import annotations

import argparse
import copy
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .experiments import (
    EXPERIMENTS,
    FORMATS,
    ConfigError,
    default_config,
    resolve_config,
    run,
    set_override,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage already; keep that but route through ConfigError
    def error(self, message):
        raise ConfigError("arguments", message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry (dotted keys, JSON values)")
    p.add_argument("--out", help="output table path")
    p.add_argument("--format", choices=FORMATS, help="table format")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dtqw-lab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        _common(sub.add_parser(name, help=f"run the {name} experiment"))
    sw = sub.add_parser("sweep", help="run one experiment over a list of values of one key")
    sw.add_argument("experiment", choices=EXPERIMENTS)
    sw.add_argument("--vary", required=True, metavar="KEY=V1,V2,...")
    sw.add_argument("--workers", type=int, default=4)
    _common(sw)
    return parser


def _load(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON ({exc})") from None


def _assemble(args, experiment: str) -> dict:
    raw = _load(args.config)
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    raw.setdefault("experiment", experiment)
    for item in args.overrides:
        raw = set_override(raw, item)
    if args.out is not None:
        raw = set_override(raw, "output.path=" + json.dumps(args.out))
    if args.format is not None:
        raw = set_override(raw, "output.format=" + json.dumps(args.format))
    resolve_config(raw, experiment)
    return raw


def _sweep(args) -> dict:
    base = _assemble(args, args.experiment)
    if "=" not in args.vary:
        raise ConfigError("--vary", "expected KEY=V1,V2,...")
    key, values = args.vary.split("=", 1)
    values = [v for v in values.split(",") if v]
    if not values:
        raise ConfigError("--vary", "no values given")
    fmt = resolve_config(base, args.experiment)["output"]["format"]
    out_dir = Path(args.out) if args.out else Path(default_config(args.experiment)["experiment"])
    configs = []
    for i, value in enumerate(values):
        cfg = set_override(copy.deepcopy(base), f"{key}={value}")
        cfg = set_override(cfg, "output.path=" + json.dumps(str(out_dir / f"{args.experiment}-{i:03d}.{fmt}")))
        resolve_config(cfg, args.experiment)
        configs.append(cfg)
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        results = list(pool.map(run, configs))
    index = [
        {"value": v, "table": r.table_path.name, "summary": r.summary}
        for v, r in zip(values, results)
    ]
    doc = {"experiment": args.experiment, "key": key, "runs": index}
    (out_dir / "index.json").write_bytes((json.dumps(doc, sort_keys=True, indent=1) + "\n").encode())
    return doc


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "sweep":
            doc = _sweep(args)
        else:
            result = run(_assemble(args, args.command))
            doc = {"summary": result.summary, "table": str(result.table_path),
                   "config_hash": result.meta["config_hash"]}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(json.dumps(doc, sort_keys=True, indent=1))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
