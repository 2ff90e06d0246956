"""Command-line interface.

Subcommands:

``run``
    one experiment at fixed weights (or grid-searched with ``--search``);
``sweep``
    the same with every weight chosen by grid search;
``filters``
    print the digital filters for a pair of operator orders.

Every :class:`ExperimentConfig` field has a flag (``--omega-max`` for
``omega_max``). ``--config FILE`` reads ``key = value`` lines first; flags
override the file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .filters import filter_table
from .pipeline import ConfigError, ExperimentConfig, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 2, 3

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_DEFAULTS = ExperimentConfig()


def _coerce(name: str, text: str):
    default = getattr(_DEFAULTS, name)
    text = text.strip()
    try:
        if isinstance(default, bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(p.strip() for p in text.split(",") if p.strip())
        return text
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {text!r}") from None


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


class _ConfigErrorParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _ConfigErrorParser(prog="sparse-smooth", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ConfigErrorParser)
    for name, help_text in (("run", "run one experiment"),
                            ("sweep", "run one experiment with grid-searched weights")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value file")
        for field in _FIELDS.values():
            p.add_argument("--" + field.name.replace("_", "-"), dest=field.name, default=None,
                           metavar=type(getattr(_DEFAULTS, field.name)).__name__.upper(),
                           help=f"default: {getattr(_DEFAULTS, field.name)}")
    p = sub.add_parser("filters", help="print the filters for operator orders")
    p.add_argument("--order1", type=int, default=1)
    p.add_argument("--order2", type=int, default=2)
    return parser


def resolve_config(args: argparse.Namespace, search: bool = False) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in _FIELDS:
        text = getattr(args, name, None)
        if text is not None:
            values[name] = _coerce(name, text)
    if search:
        values["search"] = True
    return ExperimentConfig(**values)


def _print_filters(order1: int, order2: int) -> None:
    table = filter_table(order1, order2)
    for name, f in table.items():
        taps = np.array2string(f.array, precision=12, separator=", ", max_line_width=200)
        print(f"{name:7s} offset={f.offset:+d} taps={taps}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "filters":
            _print_filters(args.order1, args.order2)
            return EXIT_OK
        cfg = resolve_config(args, search=args.command == "sweep")
        report = run_experiment(cfg)
    except ValueError as exc:  # ConfigError, IllPosedError and invalid orders
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = {name: round(r.snr_db, 2) for name, r in report.results.items()}
    print(json.dumps({"snr_db": summary, "output_dir": cfg.output_dir}))
    if not report.converged:
        print("warning: ADMM did not converge for at least one model", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
