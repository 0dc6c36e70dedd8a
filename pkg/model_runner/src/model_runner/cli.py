"""Command line interface: train or predict from a JSON run manifest.

Exit codes: 0 success, 1 run failure, 2 usage error (argparse default). The
resulting artifact/prediction path prints to stdout; logs go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .manifest import RunManifest
from .runner import predict, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="model-runner", description=__doc__)
    parser.add_argument("--quiet", action="store_true", help="suppress per-epoch progress logs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune per the manifest; prints the artifact path")
    p.add_argument("manifest", help="run manifest JSON path")

    p = sub.add_parser("predict", help="write prediction JSONL for the manifest's test file")
    p.add_argument("manifest", help="run manifest JSON path")
    p.add_argument("--model", help="model artifact path (default: the manifest's out_model)")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING if args.quiet else logging.INFO)
    try:
        manifest = RunManifest.from_file(args.manifest)
        if args.command == "train":
            result = train(manifest)
        else:
            result = predict(manifest, model=args.model)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"model-runner: {exc}", file=sys.stderr)
        return 1
    print(result)
    return 0


def entrypoint() -> None:
    sys.exit(main())
