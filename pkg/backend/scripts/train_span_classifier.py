#!/usr/bin/env python3
"""Offline fine-tuning recipe for the span-type classifier.

Builds the delimited training instances (LU and FE marker tokens, frame name
appended, ~10% random "Not an FE" negatives) from a canonical corpus dump,
then fine-tunes a sequence-classification checkpoint when transformers/torch
are installed. The serving path never imports this file.

Usage:
    python scripts/train_span_classifier.py --corpus corpus.jsonl --out-dir out/
        [--model-id SpanBERT/spanbert-large-cased] [--epochs 20] [--lr 2e-5]
        [--data-only]
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from modelbackend.traindata import build_classifier_training, write_training_jsonl

SPECIAL_TOKENS = ["<LU_START>", "<LU_END>", "<FE_START>", "<FE_END>"]


def load_records(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "_header" not in record:
                records.append(record)
    return records


def finetune(data_path: Path, out_dir: Path, model_id: str, epochs: int, lr: float,
             weight_decay: float, batch_size: int) -> None:
    try:
        import torch
        from torch.utils.data import DataLoader, Dataset
        from transformers import (
            AutoModelForSequenceClassification,
            AutoTokenizer,
            get_linear_schedule_with_warmup,
        )
    except ImportError as exc:
        raise SystemExit(
            f"fine-tuning needs the 'hf' extra (transformers/torch): {exc}"
        )

    instances = [json.loads(l) for l in data_path.read_text(encoding="utf-8").splitlines()]
    labels = sorted({inst["label"] for inst in instances})
    label_to_id = {label: i for i, label in enumerate(labels)}

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    tokenizer.add_special_tokens({"additional_special_tokens": SPECIAL_TOKENS})
    model = AutoModelForSequenceClassification.from_pretrained(
        model_id,
        num_labels=len(labels),
        id2label={i: label for label, i in label_to_id.items()},
        label2id=label_to_id,
    )
    model.resize_token_embeddings(len(tokenizer))

    class SpanDataset(Dataset):
        def __len__(self):
            return len(instances)

        def __getitem__(self, idx):
            inst = instances[idx]
            enc = tokenizer(
                inst["input"], truncation=True, max_length=256, padding="max_length",
                return_tensors="pt",
            )
            return {
                "input_ids": enc.input_ids[0],
                "attention_mask": enc.attention_mask[0],
                "labels": torch.tensor(label_to_id[inst["label"]]),
            }

    loader = DataLoader(SpanDataset(), batch_size=batch_size, shuffle=True)
    optimizer = torch.optim.AdamW(model.parameters(), lr=lr, weight_decay=weight_decay)
    total_steps = len(loader) * epochs
    scheduler = get_linear_schedule_with_warmup(optimizer, 0, total_steps)
    device = "cuda" if torch.cuda.is_available() else "cpu"
    model.to(device)
    model.train()
    for epoch in range(epochs):
        running = 0.0
        for batch in loader:
            batch = {k: v.to(device) for k, v in batch.items()}
            loss = model(**batch).loss
            loss.backward()
            optimizer.step()
            scheduler.step()
            optimizer.zero_grad()
            running += loss.item()
        print(f"epoch {epoch + 1}/{epochs}: loss {running / max(len(loader), 1):.4f}")

    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    print(f"saved checkpoint to {out_dir}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--model-id", default="SpanBERT/spanbert-large-cased")
    parser.add_argument("--negative-fraction", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--lr", type=float, default=2e-5)
    parser.add_argument("--weight-decay", type=float, default=0.01)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument(
        "--data-only", action="store_true", help="emit training data and stop"
    )
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = load_records(args.corpus)
    instances = build_classifier_training(
        records, negative_fraction=args.negative_fraction, seed=args.seed
    )
    data_path = out_dir / "train_instances.jsonl"
    n = write_training_jsonl(data_path, instances)
    print(f"wrote {n} training instances to {data_path}")
    if not args.data_only:
        finetune(
            data_path, out_dir, args.model_id, args.epochs, args.lr,
            args.weight_decay, args.batch_size,
        )


if __name__ == "__main__":
    main()
