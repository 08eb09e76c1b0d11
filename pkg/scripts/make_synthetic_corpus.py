#!/usr/bin/env python3
"""Generate a two-cluster synthetic corpus.

Every line draws all its tokens from one of two disjoint word clusters, so
line-bounded context windows never mix clusters. Trained representations
should recover the split; see run_cluster_experiment.py.
"""

import argparse
import sys

import numpy as np

LETTERS = "abcdefghijklmnopqrstuvwxyz"


def make_words(rng, count, lengths=(4, 8)):
    seen = set()
    words = []
    while len(words) < count:
        n = int(rng.integers(lengths[0], lengths[1] + 1))
        w = "".join(rng.choice(list(LETTERS), size=n))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", required=True, help="corpus file to write")
    ap.add_argument("--clusters-out", help="optional file listing word<TAB>cluster")
    ap.add_argument("--vocab-size", type=int, default=200,
                    help="total distinct words, split evenly (default 200)")
    ap.add_argument("--lines", type=int, default=20_000)
    ap.add_argument("--line-len", type=int, default=10)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    words = make_words(rng, args.vocab_size)
    half = args.vocab_size // 2
    cluster_a, cluster_b = words[:half], words[half:]

    with open(args.output, "w", encoding="utf-8") as fh:
        for _ in range(args.lines):
            pool = cluster_a if rng.random() < 0.5 else cluster_b
            fh.write(" ".join(rng.choice(pool, size=args.line_len)) + "\n")

    if args.clusters_out:
        with open(args.clusters_out, "w", encoding="utf-8") as fh:
            for w in cluster_a:
                fh.write(f"{w}\ta\n")
            for w in cluster_b:
                fh.write(f"{w}\tb\n")

    print(f"{args.lines} lines x {args.line_len} tokens, "
          f"{args.vocab_size} words -> {args.output}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
