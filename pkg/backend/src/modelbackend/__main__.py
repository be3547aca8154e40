"""CLI: run the service or build classifier training data."""
from __future__ import annotations

import argparse
import logging

from .config import ALL_ENDPOINTS, BackendConfig
from .service import serve


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(prog="modelbackend")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("serve", help="serve the wire-protocol endpoints")
    run.add_argument("--host", default="127.0.0.1")
    run.add_argument("--port", type=int, default=8600)
    run.add_argument("--mode", choices=["null", "hf"], default="null")
    run.add_argument("--corpus", default=None, help="canonical JSONL corpus dump")
    run.add_argument(
        "--endpoints",
        default=",".join(ALL_ENDPOINTS),
        help="comma-separated subset of generate,classify,score",
    )
    run.add_argument("--generator-model", default=None)
    run.add_argument("--classifier-model", default=None)
    run.add_argument("--scorer-model", default=None)
    run.add_argument("--device", default="cpu")
    run.add_argument("--vocab-size", type=int, default=50_000)

    data = sub.add_parser("build-train-data", help="emit span-classifier training JSONL")
    data.add_argument("--corpus", required=True)
    data.add_argument("--out", required=True)
    data.add_argument("--negative-fraction", type=float, default=0.1)
    data.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)

    if args.command == "serve":
        config = BackendConfig(
            endpoints=tuple(e.strip() for e in args.endpoints.split(",") if e.strip()),
            mode=args.mode,
            corpus_path=args.corpus,
            generator_model=args.generator_model,
            classifier_model=args.classifier_model,
            scorer_model=args.scorer_model,
            device=args.device,
            vocab_size=args.vocab_size,
        )
        serve(config, host=args.host, port=args.port)
    else:
        import json

        from .traindata import build_classifier_training, write_training_jsonl

        with open(args.corpus, encoding="utf-8") as fh:
            records = [
                json.loads(line)
                for line in fh
                if line.strip() and "_header" not in json.loads(line)
            ]
        instances = build_classifier_training(
            records, negative_fraction=args.negative_fraction, seed=args.seed
        )
        n = write_training_jsonl(args.out, instances)
        print(f"wrote {n} instances to {args.out}")


if __name__ == "__main__":
    main()
