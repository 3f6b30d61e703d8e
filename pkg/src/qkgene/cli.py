"""Command line front end.

Each subcommand recomputes the pipeline deterministically from the config
up to its own stage and writes that stage's artifacts, so stages can be
inspected independently without an artifact-passing protocol. Exit codes:
0 success, 1 configuration error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import pipeline
from .errors import ConfigError, DataError, NumericalError

STAGE_COMMANDS = ("select", "reduce", "kernel", "train", "evaluate",
                  "run-all", "compare-kernels")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkgene",
        description="Gene selection and quantum-kernel classification pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGE_COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="key=value config file")
        cmd.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="override a config key (repeatable)")
        cmd.add_argument("--data", help="shorthand for --set data.path=...")
        cmd.add_argument("--out", help="shorthand for --set out.dir=...")
        cmd.add_argument("--seed", type=int, help="shorthand for --set seed=...")
        if name != "select":
            cmd.add_argument("--no-selection", action="store_true",
                             help="skip the gene-selection stage")
    return parser


def _config_from_args(args) -> pipeline.PipelineConfig:
    mapping: dict[str, str] = {}
    if args.config:
        mapping.update(pipeline.load_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        mapping[key.strip()] = value.strip()
    if args.data:
        mapping["data.path"] = args.data
    if args.out:
        mapping["out.dir"] = args.out
    if args.seed is not None:
        mapping["seed"] = str(args.seed)
    return pipeline.parse_config(mapping)


def _dispatch(args) -> None:
    cfg = _config_from_args(args)
    use_selection = not getattr(args, "no_selection", False)
    if args.command == "select":
        mask, _convergence = pipeline.run_select(cfg)
        print(f"selected {mask.selected_count}/{len(mask.bits)} genes; "
              f"artifacts in {cfg.out_dir}")
    elif args.command == "reduce":
        prep = pipeline.run_reduce(cfg, use_selection)
        print(f"reduced to {prep.k_effective} components; artifacts in {cfg.out_dir}")
    elif args.command == "kernel":
        k_train, k_cross = pipeline.run_kernel(cfg, use_selection)
        print(f"kernel matrices {k_train.shape} and {k_cross.shape}; "
              f"artifacts in {cfg.out_dir}")
    elif args.command == "train":
        model = pipeline.run_train(cfg, use_selection)
        print(f"trained model with {len(model.support_indices)} support vectors; "
              f"artifacts in {cfg.out_dir}")
    elif args.command in ("evaluate", "run-all"):
        payload = pipeline.run_full(cfg, use_selection)
        print(json.dumps(payload, sort_keys=True, indent=2))
    elif args.command == "compare-kernels":
        result = pipeline.run_compare_kernels(cfg, use_selection=use_selection)
        for row in result.rows:
            print(f"{row['kernel']:>10}  accuracy={row['accuracy']:.4f}  "
                  f"f1={row['f1']:.4f}  auc={row['auc']:.4f}")
    else:  # pragma: no cover - argparse restricts the choices
        raise ConfigError(f"unknown command {args.command}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
