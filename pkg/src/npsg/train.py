"""Training loops for the projection model and the baseline skip-gram.

Both models share the pair stream and NEG objective. The projection model
perturbs target words before featurizing them; the baseline looks targets
up in a trainable table and trains without augmentation, weight decay, or
the regularizer.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from npsg import augment, encoder, objective
from npsg.config import TrainConfig
from npsg.corpus import NoiseTable, PairStream, Vocabulary, build_noise_table, iter_token_lines
from npsg.model import BaselineSGModel, NPSGModel
from npsg.projector import ProjectionSpec, word_input

# callback signature: (epoch, step, mean loss, examples/sec)
ProgressCallback = Callable[[int, int, float, float], None]

_PROJ_CACHE_MAX = 1 << 17


class _ProjectionCache:
    """Bounded word -> encoder-input cache (FIFO eviction)."""

    def __init__(self, spec: ProjectionSpec, max_entries: int = _PROJ_CACHE_MAX):
        self.spec = spec
        self.max_entries = max_entries
        self._store: dict[str, np.ndarray] = {}

    def get(self, word: str) -> np.ndarray:
        vec = self._store.get(word)
        if vec is None:
            vec = word_input(word, self.spec)
            if len(self._store) >= self.max_entries:
                self._store.pop(next(iter(self._store)))
            self._store[word] = vec
        return vec


def _epoch_batches(corpus_paths, vocab: Vocabulary, config: TrainConfig,
                   rng: np.random.Generator, lowercase: bool):
    """Yield (target_words, context_ids) batches for one corpus pass.

    Pairs are generated line by line (windows never cross lines) and batched
    in stream order; a trailing batch smaller than 2 is dropped because
    batch-norm statistics need at least two rows.
    """
    targets: list[str] = []
    ctx: list[int] = []
    for line in iter_token_lines(corpus_paths, lowercase=lowercase):
        stream = PairStream(source=line, vocab=vocab, window_max=config.window_max,
                            rng_seed=rng, keep_threshold=config.subsample_t)
        for target, context in stream:
            targets.append(target)
            ctx.append(vocab.id_of[context])
            if len(targets) == config.batch_size:
                yield targets, np.array(ctx, dtype=np.int64)
                targets, ctx = [], []
    if len(targets) >= 2:
        yield targets, np.array(ctx, dtype=np.int64)


def _epoch_rngs(seed_seq: np.random.SeedSequence):
    """Independent streams for pair sampling, perturbation, and step noise."""
    stream_ss, perturb_ss, step_ss = seed_seq.spawn(3)
    return (np.random.default_rng(stream_ss), np.random.default_rng(perturb_ss), step_ss)


def _shard_slices(mb: int, shards: int) -> list[slice]:
    """Contiguous shard slices, each with at least 2 rows (BN minimum)."""
    shards = max(1, min(shards, mb // 2))
    bounds = np.linspace(0, mb, shards + 1, dtype=int)
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b - a > 0]


def _sharded_step(x, ctx_ids, params, table, noise, config, step_ss, pool, threads):
    """Loss and gradients for one minibatch, sharded across a thread pool.

    Each shard is treated as an independent sub-batch (its own batch-norm
    statistics and noise draws); shard results are reduced in shard order
    weighted by shard size, and running statistics are applied in shard
    order, so the step is reproducible for a fixed thread count.
    """
    mb = x.shape[0]
    slices = _shard_slices(mb, threads)
    rngs = [np.random.default_rng(s) for s in step_ss.spawn(len(slices))]

    def run(i: int):
        sl = slices[i]
        return objective.total_loss(x[sl], ctx_ids[sl], params, table, noise,
                                    config, rngs[i], update_running=False,
                                    return_tape=True)

    if pool is None or len(slices) == 1:
        results = [run(i) for i in range(len(slices))]
    else:
        results = list(pool.map(run, range(len(slices))))

    loss = 0.0
    grads: dict[str, np.ndarray] = {}
    for sl, (shard_loss, shard_grads, tape) in zip(slices, results):
        w = (sl.stop - sl.start) / mb
        loss += w * shard_loss
        for name, g in shard_grads.items():
            if name in grads:
                grads[name] += w * g
            else:
                grads[name] = w * g
        encoder.apply_running_update(params, tape)
    return loss, grads


def train(corpus_paths: str | Sequence[str], vocab: Vocabulary, config: TrainConfig,
          spec: ProjectionSpec, callback: ProgressCallback | None = None,
          threads: int = 1, lowercase: bool = False,
          noise: NoiseTable | None = None) -> tuple[NPSGModel, dict]:
    """Train the projection skip-gram model.

    Deterministic for a fixed config.seed at threads=1; with threads > 1,
    minibatch shards are computed in parallel and reduced in shard order,
    which is reproducible for a fixed thread count but not across different
    ones. Returns the finalized model (float32 tensors) and a summary dict.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    noise = noise if noise is not None else build_noise_table(vocab)
    root = np.random.SeedSequence(config.seed)
    init_ss, *epoch_ss = root.spawn(config.epochs + 1)
    init_rng = np.random.default_rng(init_ss)

    params = encoder.init_encoder((spec.total_bits, *config.hidden_sizes),
                                  config.dropout_p, init_rng)
    table = encoder.init_context_table(len(vocab), config.output_dim, init_rng)
    opt_params = {**params.param_groups(), "context_table": table}
    state = objective.AdamState.for_params(opt_params)
    cache = _ProjectionCache(spec)

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    history: list[float] = []
    step = 0
    examples = 0
    started = time.monotonic()
    try:
        for epoch in range(1, config.epochs + 1):
            stream_rng, perturb_rng, step_ss = _epoch_rngs(epoch_ss[epoch - 1])
            loss_sum = 0.0
            n_pairs = 0
            epoch_start = time.monotonic()
            for targets, ctx_ids in _epoch_batches(corpus_paths, vocab, config,
                                                   stream_rng, lowercase):
                if config.perturb_prob > 0:
                    targets = [augment.maybe_perturb(w, config.perturb_prob, perturb_rng)
                               for w in targets]
                x = np.stack([cache.get(w) for w in targets])
                loss, grads = _sharded_step(x, ctx_ids, params, table, noise,
                                            config, step_ss, pool, threads)
                if not np.isfinite(loss):
                    raise RuntimeError(f"non-finite loss {loss} at epoch {epoch} step {step}")
                # opt_params views the same arrays the encoder uses, so the
                # in-place Adam update trains the model directly
                objective.adam_step(opt_params, grads, state,
                                    config.learning_rate, config.clip_norm)
                loss_sum += loss * x.shape[0]
                n_pairs += x.shape[0]
                step += 1
            if n_pairs == 0:
                raise RuntimeError("corpus produced no training pairs")
            mean_loss = loss_sum / n_pairs
            history.append(mean_loss)
            examples += n_pairs
            if callback is not None:
                rate = n_pairs / max(time.monotonic() - epoch_start, 1e-9)
                callback(epoch, step, mean_loss, rate)
    finally:
        if pool is not None:
            pool.shutdown()

    _sync_params(params, opt_params)
    model = NPSGModel(spec=spec, params=params.astype(np.float32), config=config,
                      context_table=table.astype(np.float32))
    return model, _summary("np-sg", config, step, examples, history, started)


def train_baseline_sg(corpus_paths: str | Sequence[str], vocab: Vocabulary,
                      config: TrainConfig, callback: ProgressCallback | None = None,
                      lowercase: bool = False,
                      noise: NoiseTable | None = None) -> tuple[BaselineSGModel, dict]:
    """Train the lookup-table skip-gram baseline.

    Identical pair stream and NEG objective, with the input representation a
    trainable per-word table; no perturbation and no cosine regularizer.
    Parameter count is 2 * |V| * dim.
    """
    noise = noise if noise is not None else build_noise_table(vocab)
    root = np.random.SeedSequence(config.seed)
    init_ss, *epoch_ss = root.spawn(config.epochs + 1)
    init_rng = np.random.default_rng(init_ss)

    dim = config.output_dim
    input_table = init_rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(vocab), dim))
    context_table = encoder.init_context_table(len(vocab), dim, init_rng)
    opt_params = {"input_table": input_table, "context_table": context_table}
    state = objective.AdamState.for_params(opt_params)

    history: list[float] = []
    step = 0
    examples = 0
    started = time.monotonic()
    for epoch in range(1, config.epochs + 1):
        stream_rng, _, step_ss = _epoch_rngs(epoch_ss[epoch - 1])
        loss_sum = 0.0
        n_pairs = 0
        epoch_start = time.monotonic()
        for targets, ctx_ids in _epoch_batches(corpus_paths, vocab, config,
                                               stream_rng, lowercase):
            rng = np.random.default_rng(step_ss.spawn(1)[0])
            target_ids = np.array([vocab.id_of[w] for w in targets], dtype=np.int64)
            reprs = input_table[target_ids]
            loss, dreprs, dtable = objective.neg_loss(
                reprs, ctx_ids, context_table, noise, config.negatives_k, rng)
            if not np.isfinite(loss):
                raise RuntimeError(f"non-finite loss {loss} at epoch {epoch} step {step}")
            dinput = np.zeros_like(input_table)
            np.add.at(dinput, target_ids, dreprs)
            objective.adam_step(opt_params, {"input_table": dinput, "context_table": dtable},
                                state, config.learning_rate, config.clip_norm)
            loss_sum += loss * len(targets)
            n_pairs += len(targets)
            step += 1
        if n_pairs == 0:
            raise RuntimeError("corpus produced no training pairs")
        history.append(loss_sum / n_pairs)
        examples += n_pairs
        if callback is not None:
            rate = n_pairs / max(time.monotonic() - epoch_start, 1e-9)
            callback(epoch, step, history[-1], rate)

    model = BaselineSGModel(words=list(vocab.words),
                            input_table=input_table.astype(np.float32), config=config,
                            context_table=context_table.astype(np.float32))
    return model, _summary("baseline-sg", config, step, examples, history, started)


def _sync_params(params, opt_params) -> None:
    """Re-point encoder arrays at the optimizer's tensors.

    adam_step mutates arrays in place, so this is normally a no-op; it only
    matters if a gradient dict ever replaced an entry wholesale.
    """
    for name, value in opt_params.items():
        if name != "context_table":
            params.set_group(name, value)


def _summary(kind: str, config: TrainConfig, step: int, examples: int,
             history: list[float], started: float) -> dict:
    elapsed = time.monotonic() - started
    return {
        "model_kind": kind,
        "epochs": config.epochs,
        "steps": step,
        "examples": examples,
        "final_epoch_loss": history[-1] if history else float("nan"),
        "epoch_losses": list(history),
        "examples_per_sec": examples / max(elapsed, 1e-9),
        "seconds": elapsed,
    }


def format_summary(summary: dict) -> str:
    """Structured key-value block emitted after training."""
    lines = []
    for key in ("model_kind", "epochs", "steps", "examples",
                "final_epoch_loss", "examples_per_sec", "seconds"):
        value = summary[key]
        if isinstance(value, float):
            lines.append(f"{key} = {value:.6f}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines)
