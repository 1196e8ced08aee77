#!/usr/bin/env python3
"""Full-scale MNIST / FashionMNIST supervised run (optional, long-running).

This script reproduces the pipeline shape of the headline image experiments:
stochastic binarization of the raw images, per-class conditional MRF fitting
with greedy covariance neighborhoods, extended bias fitting, evaluation, and
per-class sample grids generated by 6000 sweeps of Gibbs dynamics emitting
final-step probabilities.  There is no numeric acceptance bar attached; at
full 28x28 scale with tens of thousands of images expect hours of runtime.

MNIST IDX files are not bundled; download them yourself, e.g. the classic
train-images-idx3-ubyte(.gz) / train-labels-idx1-ubyte(.gz) pairs, and pass
the paths below.  Binary label subsets are selected with --classes A B.

Example (2-class, downsampled, desk-sized):
    python3 scripts/run_mnist_full.py \
        --train-images train-images-idx3-ubyte.gz \
        --train-labels train-labels-idx1-ubyte.gz \
        --test-images t10k-images-idx3-ubyte.gz \
        --test-labels t10k-labels-idx1-ubyte.gz \
        --classes 0 1 --downsample 8 --train-count 4000 --out mnist_run
"""

import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rbmnet.experiments import eval_supervised, run_experiment, train_supervised
from rbmnet.images import binarize_images, downsample_nearest, read_idx


def load_subset(images_path, labels_path, classes, count, seed, side):
    images = read_idx(images_path).astype(np.float64) / 255.0
    labels = read_idx(labels_path)
    mask = np.isin(labels, classes)
    images, labels = images[mask], labels[mask]
    if count and count < len(images):
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(images), size=count, replace=False)
        images, labels = images[pick], labels[pick]
    if side:
        images = downsample_nearest(images, (side, side))
    spins = np.where(labels == classes[1], 1, -1).astype(np.int8)
    return binarize_images(images, seed, labels=spins), images.shape[1:]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--train-images", required=True)
    ap.add_argument("--train-labels", required=True)
    ap.add_argument("--test-images", required=True)
    ap.add_argument("--test-labels", required=True)
    ap.add_argument("--classes", type=int, nargs=2, default=(0, 1),
                    help="two digit classes mapped to labels -1/+1")
    ap.add_argument("--downsample", type=int, default=0,
                    help="optional side length (0 keeps native resolution)")
    ap.add_argument("--train-count", type=int, default=0,
                    help="subsample size (0 = all)")
    ap.add_argument("--test-count", type=int, default=0)
    ap.add_argument("--tau", type=float, default=0.02)
    ap.add_argument("--t-star", type=int, default=12,
                    help="maximum neighborhood size")
    ap.add_argument("--clip-lambda1", type=float, default=1.5)
    ap.add_argument("--sweeps", type=int, default=6000,
                    help="Gibbs sweeps for sample generation")
    ap.add_argument("--samples-per-class", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="mnist_run")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    train, shape = load_subset(args.train_images, args.train_labels,
                               tuple(args.classes), args.train_count,
                               args.seed, args.downsample)
    test, _ = load_subset(args.test_images, args.test_labels,
                          tuple(args.classes), args.test_count,
                          args.seed + 1, args.downsample)
    train_path = os.path.join(args.out, "train.txt")
    test_path = os.path.join(args.out, "test.txt")
    train.save(train_path)
    test.save(test_path)
    print(f"train {train.m} x {train.n} spins, test {test.m}")

    report, _ = train_supervised(
        {"dataset": train_path, "seed": args.seed,
         "supervised": {"tau": args.tau, "t_star": args.t_star},
         "clip_lambda1": args.clip_lambda1, "bias_mode": "extended"},
        out_dir=args.out)
    print(json.dumps(report.to_doc()["metrics"], indent=1, sort_keys=True))

    ev = eval_supervised({"dataset": test_path,
                          "predictor": os.path.join(args.out,
                                                    "predictor.json")},
                         out_dir=args.out)
    print(json.dumps(ev.to_doc()["metrics"], indent=1, sort_keys=True))

    sample_report = run_experiment(
        "sample",
        {"predictor": os.path.join(args.out, "predictor.json"),
         "image_shape": list(shape), "sweeps": args.sweeps,
         "n_samples": args.samples_per_class, "seed": args.seed},
        out_dir=args.out)
    for path in sample_report.artifacts:
        print("wrote", path)


if __name__ == "__main__":
    main()
