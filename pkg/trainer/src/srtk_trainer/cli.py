"""Command-line entry points: srtk-train and srtk-serve."""

from __future__ import annotations

import argparse
import logging
import sys

from .training import TrainerConfig, train


def main_train(argv: list[str] | None = None):
    parser = argparse.ArgumentParser(
        prog="srtk-train", description="fine-tune a language encoder into a path scorer"
    )
    parser.add_argument("--train-dataset", required=True, help="training samples (.jsonl)")
    parser.add_argument("--output-dir", required=True, help="directory for the trained scorer")
    parser.add_argument("--model-name-or-path", required=True,
                        help="base encoder: hub name or local directory")
    parser.add_argument("--loss", choices=["cross_entropy", "ntxent"], default="cross_entropy")
    parser.add_argument("--temperature", type=float, default=None,
                        help="softmax temperature (default 1.0 for cross_entropy, 0.07 for ntxent)")
    parser.add_argument("--pooling", choices=["cls", "mean"], default=None,
                        help="override automatic pooling selection")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--lr", type=float, default=1e-4)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    config = TrainerConfig(
        model_name_or_path=args.model_name_or_path,
        output_dir=args.output_dir,
        loss=args.loss,
        temperature=args.temperature,
        pooling=args.pooling,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        device=args.device,
    )
    out = train(config, args.train_dataset)
    print(f"scorer saved to {out}")


def main_serve(argv: list[str] | None = None):
    parser = argparse.ArgumentParser(
        prog="srtk-serve", description="serve a trained scorer over POST /embed"
    )
    parser.add_argument("--model-dir", required=True, help="trained scorer directory")
    parser.add_argument("--port", type=int, required=True)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    from .serving import EmbeddingServer, EmbeddingService

    server = EmbeddingServer(
        EmbeddingService(args.model_dir, device=args.device), port=args.port, host=args.host
    )
    print(f"serving {args.model_dir} on {server.url}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
