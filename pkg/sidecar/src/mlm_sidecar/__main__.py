"""Command-line entry: load a checkpoint and serve requests on stdio."""

from __future__ import annotations

import argparse
import sys

from mlm_sidecar.model import DEFAULT_CHECKPOINT, MODEL_ENV_VAR, resolve_checkpoint
from mlm_sidecar.server import StdioServer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlm-sidecar",
        description="Masked-LM worker: JSON-lines embed/fill/info over stdin/stdout.",
    )
    parser.add_argument(
        "--model",
        default=None,
        help=(
            "checkpoint name or local path; falls back to the "
            f"{MODEL_ENV_VAR} environment variable, then {DEFAULT_CHECKPOINT!r}"
        ),
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    server = StdioServer(resolve_checkpoint(args.model), sys.stdin, sys.stdout)
    return server.serve()


if __name__ == "__main__":
    sys.exit(main())
