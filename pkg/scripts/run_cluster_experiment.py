#!/usr/bin/env python3
"""Two-cluster sanity experiment, end to end.

Builds a synthetic corpus whose lines never mix clusters, trains the
projection model with and without the cosine regularizer plus the lookup
baseline, then reports:

  * mean pairwise |cosine| across all distinct words (regularizer effect)
  * mean intra- vs inter-cluster cosine and top-1 within-cluster rate
  * example nearest neighbors, including a misspelled query the lookup
    baseline cannot represent

Runs in a couple of minutes on one core.
"""

import argparse
import os
import sys
import tempfile

import numpy as np

from npsg.config import TrainConfig
from npsg.corpus import build_vocabulary, iter_tokens
from npsg.evaluate import nearest_neighbors
from npsg.projector import ProjectionSpec
from npsg.train import train, train_baseline_sg

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from make_synthetic_corpus import make_words  # noqa: E402


def write_corpus(path, rng, cluster_a, cluster_b, lines, line_len):
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(lines):
            pool = cluster_a if rng.random() < 0.5 else cluster_b
            fh.write(" ".join(rng.choice(pool, size=line_len)) + "\n")


def rep_matrix(model, words):
    mat = np.stack([model.represent(w) for w in words])
    return mat / np.maximum(np.linalg.norm(mat, axis=1, keepdims=True), 1e-12)


def stats(model, cluster_a, cluster_b):
    words = cluster_a + cluster_b
    sims = rep_matrix(model, words) @ rep_matrix(model, words).T
    n_a = len(cluster_a)
    same = np.zeros_like(sims, dtype=bool)
    same[:n_a, :n_a] = True
    same[n_a:, n_a:] = True
    iu = np.triu_indices(len(words), k=1)
    np.fill_diagonal(sims, -np.inf)
    top1 = sims.argmax(axis=1)
    rate = float(np.mean([(i < n_a) == (int(j) < n_a)
                          for i, j in enumerate(top1)]))
    pair = sims[iu]
    return {
        "mean_abs": float(np.abs(pair).mean()),
        "intra": float(pair[same[iu]].mean()),
        "inter": float(pair[~same[iu]].mean()),
        "top1_rate": rate,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--lines", type=int, default=20_000)
    ap.add_argument("--epochs", type=int, default=5)
    ap.add_argument("--workdir", help="keep artifacts here instead of a temp dir")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    words = make_words(rng, 200)
    cluster_a, cluster_b = words[:100], words[100:]

    workdir = args.workdir or tempfile.mkdtemp(prefix="npsg_cluster_")
    os.makedirs(workdir, exist_ok=True)
    corpus = os.path.join(workdir, "clusters.txt")
    write_corpus(corpus, rng, cluster_a, cluster_b, args.lines, 10)
    vocab = build_vocabulary(iter_tokens(corpus))
    print(f"corpus: {corpus} ({vocab.total_tokens} tokens, "
          f"{len(vocab)} words)", file=sys.stderr)

    spec = ProjectionSpec(seed=5, num_projections=16, bits_per_projection=8)

    def config(lam):
        return TrainConfig(epochs=args.epochs, batch_size=256,
                           hidden_sizes=(64, 32), negatives_k=5,
                           learning_rate=0.008, window_max=3,
                           subsample_t=1e-3, perturb_prob=0.4,
                           dropout_p=0.15, reg_lambda=lam, seed=13)

    runs = {}
    for label, lam in (("np-sg", 0.01), ("np-sg w/o reg", 0.0)):
        print(f"training {label} ...", file=sys.stderr)
        model, summary = train(corpus, vocab, config(lam), spec)
        runs[label] = (model, summary)
    print("training baseline sg ...", file=sys.stderr)
    base_model, base_summary = train_baseline_sg(corpus, vocab, config(0.0))
    runs["baseline sg"] = (base_model, base_summary)

    print(f"{'model':<16}{'mean|cos|':>10}{'intra':>8}{'inter':>8}"
          f"{'top-1':>7}{'sec':>7}")
    for label, (model, summary) in runs.items():
        s = stats(model, cluster_a, cluster_b)
        print(f"{label:<16}{s['mean_abs']:>10.4f}{s['intra']:>8.3f}"
              f"{s['inter']:>8.3f}{s['top1_rate']:>7.2f}"
              f"{summary['seconds']:>7.1f}")

    model = runs["np-sg"][0]
    query = cluster_a[0]
    typo = query[0] + query[0] + query[1:]  # doubled first letter
    print()
    for q in (query, typo):
        res = nearest_neighbors(model, q, words, topk=5)
        shown = ", ".join(f"{w} ({s:.2f})" for w, s in res.neighbors)
        print(f"nn[{q}] = {shown}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
