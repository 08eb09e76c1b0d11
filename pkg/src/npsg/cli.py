"""Command-line interface.

Subcommands:
  build-vocab  count corpus tokens and write a vocabulary file
  train        train a projection skip-gram model (or the lookup baseline)
  eval-sim     Spearman correlation against a human similarity dataset
  nn           nearest neighbors of a query word
  embed        print representations for words from a file or stdin
  perturb      apply one character perturbation (debug surface)

Data goes to stdout, diagnostics to stderr, and the exit code is 0 exactly
when the command's postcondition holds. Training accepts a flat
``key = value`` configuration file mirroring TrainConfig field names plus
the projection settings below; command-line flags override file values.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

import numpy as np

from npsg import augment
from npsg.config import TrainConfig, parse_config_text
from npsg.corpus import OOVError, Vocabulary, build_vocabulary, iter_tokens
from npsg.evaluate import SimilarityDataset, eval_similarity, nearest_neighbors
from npsg.model import load_model, save_model
from npsg.projector import ProjectionSpec
from npsg.train import format_summary, train, train_baseline_sg

# accepted in config files alongside TrainConfig fields
_PROJECTION_KEYS = {
    "num_projections": int,
    "bits_per_projection": int,
    "projection_seed": int,
    "ngram_orders": tuple,
    "skipgram": bool,
}


def _int_tuple(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in raw.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {raw!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npsg",
        description="Train and evaluate projection skip-gram word representations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="count corpus tokens into a vocabulary file")
    p.add_argument("corpus", nargs="+", help="whitespace-tokenized text file(s)")
    p.add_argument("-o", "--output", required=True, help="vocabulary file to write")
    p.add_argument("--max-vocab", type=int, default=100_000,
                   help="keep the N most frequent words (default 100000)")
    p.add_argument("--lowercase", action="store_true", help="case-fold tokens")
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train", help="train a model and write a model container")
    p.add_argument("corpus", nargs="+", help="training text file(s); lines bound windows")
    p.add_argument("--vocab", required=True, help="vocabulary file from build-vocab")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--baseline", action="store_true",
                   help="train the lookup-table skip-gram baseline instead")
    p.add_argument("--threads", type=int, default=1,
                   help="minibatch shard parallelism (default 1)")
    p.add_argument("--deterministic", action="store_true",
                   help="force single-threaded fully reproducible training")
    p.add_argument("--lowercase", action="store_true", help="case-fold corpus tokens")
    p.add_argument("--include-context-table", action="store_true",
                   help="store the training-only context table in the container")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    cfg = p.add_argument_group("configuration overrides")
    cfg.add_argument("--seed", type=int, default=None)
    cfg.add_argument("--epochs", type=int, default=None)
    cfg.add_argument("--batch-size", type=int, default=None)
    cfg.add_argument("--learning-rate", type=float, default=None)
    cfg.add_argument("--negatives-k", type=int, default=None)
    cfg.add_argument("--reg-lambda", type=float, default=None)
    cfg.add_argument("--clip-norm", type=float, default=None)
    cfg.add_argument("--weight-decay", type=float, default=None)
    cfg.add_argument("--window-max", type=int, default=None)
    cfg.add_argument("--subsample-t", type=float, default=None,
                     help="subsampling threshold; 'inf' disables")
    cfg.add_argument("--perturb-prob", type=float, default=None)
    cfg.add_argument("--hidden-sizes", type=_int_tuple, default=None,
                     help="comma-separated MLP widths, e.g. 2048,100")
    cfg.add_argument("--dropout-p", type=float, default=None)
    proj = p.add_argument_group("projection settings")
    proj.add_argument("--num-projections", type=int, default=None)
    proj.add_argument("--bits-per-projection", type=int, default=None)
    proj.add_argument("--projection-seed", type=int, default=None)
    proj.add_argument("--ngram-orders", type=_int_tuple, default=None)
    proj.add_argument("--no-skipgram", action="store_true",
                      help="drop the skip-1 bigram features")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval-sim", help="score a model on a word-similarity dataset")
    p.add_argument("model", help="model container file")
    p.add_argument("dataset", help="word1<TAB>word2<TAB>score lines")
    p.set_defaults(func=cmd_eval_sim)

    p = sub.add_parser("nn", help="nearest neighbors of a query word")
    p.add_argument("model", help="model container file")
    p.add_argument("query", help="query word (any string for projection models)")
    p.add_argument("--candidates", help="candidate words, one per line "
                   "(default: baseline vocabulary; required for projection models)")
    p.add_argument("--topk", type=int, default=10)
    p.set_defaults(func=cmd_nn)

    p = sub.add_parser("embed", help="print word<TAB>f1<TAB>...<TAB>fD vectors")
    p.add_argument("model", help="model container file")
    p.add_argument("words", nargs="?", default="-",
                   help="file of words, one per line (default: stdin)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("perturb", help="apply one character perturbation")
    p.add_argument("word")
    p.add_argument("--op", choices=("insert", "swap", "duplicate"), required=True)
    p.add_argument("--n", type=int, default=1, help="number of edits (default 1)")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_perturb)

    return parser


def cmd_build_vocab(args) -> int:
    vocab = build_vocabulary(iter_tokens(args.corpus, lowercase=args.lowercase),
                             max_vocab=args.max_vocab)
    vocab.save(args.output)
    print(f"{len(vocab)} words ({vocab.total_tokens} tokens) -> {args.output}",
          file=sys.stderr)
    return 0


def _merge_train_settings(args) -> tuple[TrainConfig, ProjectionSpec]:
    """Defaults, then config file, then command-line flags."""
    values: dict = {}
    proj: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            parsed = parse_config_text(fh.read(), extra_keys=_PROJECTION_KEYS)
        for key, val in parsed.items():
            (proj if key in _PROJECTION_KEYS else values)[key] = val
    for f in fields(TrainConfig):
        override = getattr(args, f.name, None)
        if override is not None:
            values[f.name] = override
    for key in ("num_projections", "bits_per_projection", "projection_seed",
                "ngram_orders"):
        override = getattr(args, key)
        if override is not None:
            proj[key] = override
    if args.no_skipgram:
        proj["skipgram"] = False
    config = TrainConfig(**values)
    spec = ProjectionSpec(seed=proj.get("projection_seed", 1),
                          num_projections=proj.get("num_projections", 80),
                          bits_per_projection=proj.get("bits_per_projection", 14),
                          ngram_orders=tuple(proj.get("ngram_orders", (1, 2, 3, 4))),
                          skipgram=proj.get("skipgram", True))
    return config, spec


def cmd_train(args) -> int:
    config, spec = _merge_train_settings(args)
    threads = args.threads
    if args.deterministic and threads != 1:
        print("note: --deterministic forces --threads 1", file=sys.stderr)
        threads = 1
    if threads < 1:
        raise ValueError("--threads must be >= 1")
    vocab = Vocabulary.load(args.vocab)

    callback = None
    if not args.quiet:
        def callback(epoch, step, loss, rate):
            print(f"epoch {epoch} done: mean loss {loss:.6f}, "
                  f"{rate:.0f} pairs/s ({step} steps)", file=sys.stderr)

    if args.baseline:
        model, summary = train_baseline_sg(args.corpus, vocab, config,
                                           callback=callback,
                                           lowercase=args.lowercase)
    else:
        model, summary = train(args.corpus, vocab, config, spec,
                               callback=callback, threads=threads,
                               lowercase=args.lowercase)
    save_model(model, args.output,
               include_context_table=args.include_context_table)
    if not args.quiet:
        print(format_summary(summary), file=sys.stderr)
        print(f"wrote {args.output}", file=sys.stderr)
    return 0


def cmd_eval_sim(args) -> int:
    model = load_model(args.model)
    dataset = SimilarityDataset.load(args.dataset)
    result = eval_similarity(model, dataset, name=args.dataset)
    print(result.report())
    return 0


def cmd_nn(args) -> int:
    model = load_model(args.model)
    if args.candidates:
        with open(args.candidates, encoding="utf-8") as fh:
            candidates = [line.strip() for line in fh if line.strip()]
    elif hasattr(model, "words"):
        candidates = list(model.words)
    else:
        raise ValueError("projection models carry no vocabulary; pass --candidates")
    result = nearest_neighbors(model, args.query, candidates, topk=args.topk)
    for word, score in result.neighbors:
        print(f"{word}\t{score:.6f}")
    return 0


def cmd_embed(args) -> int:
    model = load_model(args.model)
    if args.words == "-":
        lines = sys.stdin
        failures = _embed_lines(model, lines)
    else:
        with open(args.words, encoding="utf-8") as fh:
            failures = _embed_lines(model, fh)
    return 1 if failures else 0


def _embed_lines(model, lines) -> int:
    failures = 0
    for lineno, line in enumerate(lines, start=1):
        word = line.strip()
        if not word:
            print(f"error: line {lineno}: empty word", file=sys.stderr)
            failures += 1
            continue
        try:
            vec = model.represent(word)
        except OOVError:
            print(f"error: line {lineno}: {word!r} not in the model vocabulary",
                  file=sys.stderr)
            failures += 1
            continue
        print(word + "\t" + "\t".join(f"{x:.6f}" for x in vec))
    return failures


def cmd_perturb(args) -> int:
    ops = {"insert": augment.insert, "swap": augment.swap,
           "duplicate": augment.duplicate}
    rng = np.random.default_rng(args.seed)
    print(ops[args.op](args.word, args.n, rng=rng))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OOVError as exc:
        print(f"error: out-of-vocabulary word {exc.args[0]!r}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
