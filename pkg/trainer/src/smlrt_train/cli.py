"""smlrt-train: search for a surrogate model over an SRDB region.

    smlrt-train --db out/run.srdb --region stencil --trials 12 \
        --seed 0 --out-dir models/

Writes trials.csv (one row per trial, best first) and exports the best
model under <out-dir>/best_model/ in the portable inference format.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

from .dataset import load_dataset
from .errors import TrainerError
from .export import export_model
from .search import ArchSpace, search

CSV_FIELDS = [
    "trial",
    "n_hidden_layers",
    "hidden1_size",
    "feature_multiplier",
    "activation",
    "learning_rate",
    "weight_decay",
    "dropout",
    "batch_size",
    "validation_rmse",
    "params",
    "path",
]


def _build_parser():
    ap = argparse.ArgumentParser(prog="smlrt-train", description=__doc__)
    ap.add_argument("--db", required=True, help="SRDB database directory")
    ap.add_argument("--region", required=True)
    ap.add_argument("--trials", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--epochs", type=int, default=60)
    ap.add_argument("--split", type=float, default=0.8,
                    help="train fraction of the shuffled samples")
    ap.add_argument("--inner-trials", type=int, default=3,
                    help="hyperparameter proposals per architecture")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        dataset = load_dataset(args.db, args.region, args.split, args.seed)
        trials = search(
            ArchSpace(),
            dataset,
            n_trials=args.trials,
            seed=args.seed,
            epochs=args.epochs,
            inner_trials=args.inner_trials,
        )
    except TrainerError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    from pathlib import Path

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    best = trials[0]
    if best.model is None or not math.isfinite(best.validation_rmse):
        print("error: every trial diverged", file=sys.stderr)
        return 1
    best_path = out_dir / "best_model"
    export_model(best.model, best_path)
    best.exported_path = str(best_path)

    with open(out_dir / "trials.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for t in trials:
            w.writerow(
                {
                    "trial": t.trial_index,
                    "n_hidden_layers": t.arch.n_hidden_layers,
                    "hidden1_size": t.arch.hidden1_size,
                    "feature_multiplier": f"{t.arch.feature_multiplier:.4f}",
                    "activation": t.arch.activation,
                    "learning_rate": f"{t.hypers.learning_rate:.6g}",
                    "weight_decay": f"{t.hypers.weight_decay:.6g}",
                    "dropout": f"{t.hypers.dropout:.4f}",
                    "batch_size": t.hypers.batch_size,
                    "validation_rmse": f"{t.validation_rmse:.8g}",
                    "params": t.parameter_count,
                    "path": t.exported_path or "",
                }
            )
    print(
        f"best of {len(trials)} trial(s): rmse {best.validation_rmse:.6g},"
        f" {best.parameter_count} params -> {best_path}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
