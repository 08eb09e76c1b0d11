"""Training objective: NEG loss, cosine outer-product regularizer, Adam.

The skip-gram NEG objective is often written as a maximization; here
everything is expressed as a minimized loss, so the per-pair term is
-(log sigma(s_pos) + sum_i log(1 - sigma(s_neg_i))), averaged over the
minibatch. The regularizer penalizes all pairwise cosine similarities
inside a minibatch via the Gram matrix of row-normalized representations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from npsg.corpus import NoiseTable

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
NORM_EPS = 1e-12


class NonFiniteGradientError(RuntimeError):
    """Raised by adam_step when a gradient group contains NaN or inf."""


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def neg_loss(reprs: np.ndarray, context_ids: np.ndarray, table: np.ndarray,
             noise: NoiseTable, k: int, rng: np.random.Generator,
             neg_ids: np.ndarray | None = None
             ) -> tuple[float, np.ndarray, np.ndarray]:
    """Negative-sampling loss, averaged over the batch.

    reprs is the (mb, dim) matrix of target representations, context_ids the
    positive context word ids. k negatives per pair are drawn from the noise
    distribution (or taken from neg_ids, shape (mb, k), when given, which
    freezes the sampling for gradient checks).

    Returns (loss, gradient w.r.t. reprs, dense gradient w.r.t. table).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    reprs = np.asarray(reprs, dtype=np.float64)
    mb, dim = reprs.shape
    context_ids = np.asarray(context_ids, dtype=np.int64)
    if context_ids.shape != (mb,):
        raise ValueError("context_ids must have one id per batch row")
    if np.any(context_ids < 0) or np.any(context_ids >= table.shape[0]):
        raise IndexError("context id out of range")
    if neg_ids is None:
        neg_ids = noise.sample(rng, size=(mb, k))
    neg_ids = np.asarray(neg_ids, dtype=np.int64)
    if neg_ids.shape != (mb, k):
        raise ValueError(f"neg_ids must have shape {(mb, k)}")
    if np.any(neg_ids < 0) or np.any(neg_ids >= table.shape[0]):
        raise IndexError("negative sample id out of range")

    pos_rows = table[context_ids]                      # (mb, dim)
    neg_rows = table[neg_ids]                          # (mb, k, dim)
    pos_logits = np.einsum("bd,bd->b", reprs, pos_rows)
    neg_logits = np.einsum("bd,bkd->bk", reprs, neg_rows)

    loss = -(_log_sigmoid(pos_logits).sum() + _log_sigmoid(-neg_logits).sum()) / mb

    dpos = (_sigmoid(pos_logits) - 1.0) / mb           # d loss / d pos_logit
    dneg = _sigmoid(neg_logits) / mb                   # d loss / d neg_logit

    dreprs = dpos[:, None] * pos_rows + np.einsum("bk,bkd->bd", dneg, neg_rows)
    dtable = np.zeros_like(table)
    np.add.at(dtable, context_ids, dpos[:, None] * reprs)
    np.add.at(dtable, neg_ids.reshape(-1),
              (dneg[:, :, None] * reprs[:, None, :]).reshape(-1, dim))
    return float(loss), dreprs, dtable


def cosine_reg_loss(reprs: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    """(lam/2) * ||Flatten(vhat vhat^T)||^2 over L2 row-normalized reprs.

    The Gram matrix includes the diagonal (self-similarities) and counts
    symmetric pairs twice, exactly as the outer-product form computes it.
    Row norms are guarded with a 1e-12 additive epsilon, so zero rows give a
    zero gradient instead of an error.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    reprs = np.asarray(reprs, dtype=np.float64)
    if reprs.ndim != 2 or reprs.shape[0] < 1:
        raise ValueError("reprs must be a (mb, dim) matrix with mb >= 1")
    raw_norms = np.linalg.norm(reprs, axis=1)
    norms = raw_norms + NORM_EPS
    vhat = reprs / norms[:, None]
    gram = vhat @ vhat.T
    loss = 0.5 * lam * float((gram * gram).sum())

    dvhat = 2.0 * lam * (gram @ vhat)
    # through v/(||v|| + eps): dv = g/n - v (v . g) / (||v|| n^2)
    safe = np.maximum(raw_norms, NORM_EPS)
    inner = (reprs * dvhat).sum(axis=1)
    dreprs = dvhat / norms[:, None] - reprs * (inner / (safe * norms * norms))[:, None]
    return loss, dreprs


def weight_decay_loss(params_weights: list[np.ndarray], decay: float) -> float:
    """0.5 * decay * ||W||^2 summed over the MLP weight matrices."""
    return 0.5 * decay * sum(float((w * w).sum()) for w in params_weights)


def total_loss(inputs: np.ndarray, context_ids: np.ndarray, params,
               table: np.ndarray, noise: NoiseTable, config, rng: np.random.Generator,
               neg_ids: np.ndarray | None = None, update_running: bool = True,
               return_tape: bool = False):
    """NEG + cosine regularizer + weight decay, with all gradients.

    Runs a train-mode encoder forward on the projection inputs, composes
    both loss terms through the encoder backward pass, and adds coupled L2
    weight decay on the MLP weight matrices only (not biases, batch norm, or
    the context table). Gradient keys match params.param_groups() plus
    "context_table". With return_tape the ForwardTape comes back as a third
    element (the trainer applies running-statistic updates from it).
    """
    from npsg import encoder  # local import to avoid a cycle at module load

    reprs, tape = encoder.forward(inputs, params, mode="train", rng=rng,
                                  update_running=update_running)
    loss, drep, dtable = neg_loss(reprs, context_ids, table, noise,
                                  config.negatives_k, rng, neg_ids=neg_ids)
    if config.reg_lambda > 0:
        reg, drep_reg = cosine_reg_loss(reprs, config.reg_lambda)
        loss += reg
        drep = drep + drep_reg
    grads, _ = encoder.backward(tape, drep, params)
    if config.weight_decay > 0:
        loss += weight_decay_loss(params.weights, config.weight_decay)
        for i, w in enumerate(params.weights):
            grads[f"W{i}"] = grads[f"W{i}"] + config.weight_decay * w
    grads["context_table"] = dtable
    if return_tape:
        return float(loss), grads, tape
    return float(loss), grads


@dataclass
class AdamState:
    """First/second moment accumulators per parameter group."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "AdamState":
        state = cls()
        for name, p in params.items():
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        return state


def clip_gradients(grads: dict[str, np.ndarray], clip_norm: float) -> float:
    """Scale all gradients in place if the global norm exceeds clip_norm.

    Returns the pre-clip global norm.
    """
    sq = sum(float((g * g).sum()) for g in grads.values())
    norm = float(np.sqrt(sq))
    if norm > clip_norm:
        scale = clip_norm / norm
        for name in grads:
            grads[name] = grads[name] * scale
    return norm


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, lr: float, clip_norm: float | None = None) -> float:
    """One optimizer step, updating params and state in place.

    Gradients are clipped by global norm first, then the standard
    bias-corrected Adam update runs per group. Non-finite gradients abort
    with the offending group named.

    Returns the pre-clip global gradient norm.
    """
    if set(params) != set(grads):
        missing = set(params) ^ set(grads)
        raise KeyError(f"params/grads key mismatch: {sorted(missing)}")
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient in group {name!r}")
        if g.shape != params[name].shape:
            raise ValueError(f"gradient shape mismatch for group {name!r}")

    norm = clip_gradients(grads, clip_norm) if clip_norm is not None else float(
        np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    state.step += 1
    t = state.step
    bias1 = 1.0 - state.beta1 ** t
    bias2 = 1.0 - state.beta2 ** t
    for name, g in grads.items():
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        params[name] -= lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
    return norm
