"""The trainable representation function: MLP + final batch normalization.

Architecture is affine -> ReLU -> dropout for every hidden layer, then a
final affine followed by batch normalization (batch statistics at train
time, running statistics at inference). Gradients are hand-derived for this
fixed family, including the path through the batch statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from npsg.projector import ProjectionSpec, word_input

BN_EPS = 1e-5
BN_MOMENTUM = 0.99  # running = momentum * running + (1 - momentum) * batch


@dataclass
class EncoderParams:
    """MLP weights plus batch-norm parameters and running statistics.

    layer_sizes[0] is the projection width T*d; layer_sizes[-1] is the
    representation dimension. Weight i maps layer_sizes[i] -> layer_sizes[i+1]
    (row-major, inputs on rows).
    """

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    bn_gamma: np.ndarray
    bn_beta: np.ndarray
    bn_running_mean: np.ndarray
    bn_running_var: np.ndarray
    dropout_p: float = 0.65

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise ValueError(f"{len(self.weights)} weight matrices for "
                             f"{len(self.layer_sizes)} layer sizes")
        if len(self.biases) != len(self.weights):
            raise ValueError("weights and biases differ in layer count")
        for i, w in enumerate(self.weights):
            expected = (self.layer_sizes[i], self.layer_sizes[i + 1])
            if w.shape != expected:
                raise ValueError(f"weight {i} has shape {w.shape}, expected {expected}")
            if self.biases[i].shape != (self.layer_sizes[i + 1],):
                raise ValueError(f"bias {i} has shape {self.biases[i].shape}")
        if np.any(self.bn_running_var <= 0):
            raise ValueError("bn_running_var entries must be positive")

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    def param_groups(self) -> dict[str, np.ndarray]:
        """Trainable tensors by name (running stats excluded)."""
        groups: dict[str, np.ndarray] = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            groups[f"W{i}"] = w
            groups[f"b{i}"] = b
        groups["bn_gamma"] = self.bn_gamma
        groups["bn_beta"] = self.bn_beta
        return groups

    def set_group(self, name: str, value: np.ndarray) -> None:
        if name.startswith("W"):
            self.weights[int(name[1:])] = value
        elif name.startswith("b") and name[1:].isdigit():
            self.biases[int(name[1:])] = value
        elif name == "bn_gamma":
            self.bn_gamma = value
        elif name == "bn_beta":
            self.bn_beta = value
        else:
            raise KeyError(name)

    def astype(self, dtype) -> "EncoderParams":
        return EncoderParams(
            layer_sizes=self.layer_sizes,
            weights=[w.astype(dtype) for w in self.weights],
            biases=[b.astype(dtype) for b in self.biases],
            bn_gamma=self.bn_gamma.astype(dtype),
            bn_beta=self.bn_beta.astype(dtype),
            bn_running_mean=self.bn_running_mean.astype(dtype),
            bn_running_var=self.bn_running_var.astype(dtype),
            dropout_p=self.dropout_p,
        )


def encoder_param_count(layer_sizes: tuple[int, ...] | list[int]) -> int:
    """Closed-form parameter count: sum of affine sizes plus 4 * output_dim.

    Independent of vocabulary size; the 4x term is gamma, beta, and the two
    running-statistic vectors.
    """
    total = sum(layer_sizes[i] * layer_sizes[i + 1] + layer_sizes[i + 1]
                for i in range(len(layer_sizes) - 1))
    return total + 4 * layer_sizes[-1]


def init_encoder(layer_sizes, dropout_p: float, rng: np.random.Generator) -> EncoderParams:
    """Xavier-uniform weights, zero biases, identity batch-norm."""
    sizes = tuple(int(s) for s in layer_sizes)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    out = sizes[-1]
    return EncoderParams(
        layer_sizes=sizes,
        weights=weights,
        biases=biases,
        bn_gamma=np.ones(out),
        bn_beta=np.zeros(out),
        bn_running_mean=np.zeros(out),
        bn_running_var=np.ones(out),
        dropout_p=dropout_p,
    )


def init_context_table(vocab_size: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Context (output) embeddings, uniform in [-1, 1]."""
    return rng.uniform(-1.0, 1.0, size=(vocab_size, dim))


@dataclass
class ForwardTape:
    """Everything backward needs from one forward call."""

    mode: str
    inputs: list[np.ndarray]        # input to each affine layer (h_0 = x)
    pre_acts: list[np.ndarray]      # affine outputs, before ReLU / batch norm
    drop_mults: list[np.ndarray | None]  # inverted-dropout multipliers per hidden layer
    bn_xhat: np.ndarray | None = None
    bn_inv_std: np.ndarray | None = None
    bn_batch_mean: np.ndarray | None = None
    bn_batch_var: np.ndarray | None = None

    @property
    def batch_size(self) -> int:
        return self.inputs[0].shape[0]


def forward(x: np.ndarray, params: EncoderParams, mode: str = "infer",
            rng: np.random.Generator | None = None,
            update_running: bool = True) -> tuple[np.ndarray, ForwardTape]:
    """Run the encoder on a batch of projection inputs.

    Train mode applies inverted dropout after each hidden ReLU and
    normalizes the last layer with batch statistics (requires batch >= 2);
    running statistics are EMA-updated unless update_running is False.
    Inference applies no dropout and uses the stored running statistics.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != params.layer_sizes[0]:
        raise ValueError(f"input width {x.shape[1]} != layer_sizes[0] {params.layer_sizes[0]}")
    train = mode == "train"
    if train and x.shape[0] < 2:
        raise ValueError("train-mode forward needs a batch of at least 2 rows")
    if train and params.dropout_p > 0 and rng is None:
        raise ValueError("train-mode forward with dropout needs an rng")

    tape = ForwardTape(mode=mode, inputs=[], pre_acts=[], drop_mults=[])
    h = x
    n_layers = len(params.weights)
    for i in range(n_layers - 1):
        tape.inputs.append(h)
        a = h @ params.weights[i] + params.biases[i]
        tape.pre_acts.append(a)
        h = np.maximum(a, 0.0)
        if train and params.dropout_p > 0:
            keep = rng.random(h.shape) >= params.dropout_p
            mult = keep / (1.0 - params.dropout_p)
            h = h * mult
            tape.drop_mults.append(mult)
        else:
            tape.drop_mults.append(None)

    tape.inputs.append(h)
    a = h @ params.weights[-1] + params.biases[-1]
    tape.pre_acts.append(a)

    if train:
        mean = a.mean(axis=0)
        var = a.var(axis=0)  # biased, matches the normalization denominator
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (a - mean) * inv_std
        tape.bn_xhat, tape.bn_inv_std = xhat, inv_std
        tape.bn_batch_mean, tape.bn_batch_var = mean, var
        if update_running:
            apply_running_update(params, tape)
    else:
        xhat = (a - params.bn_running_mean) / np.sqrt(params.bn_running_var + BN_EPS)
    y = params.bn_gamma * xhat + params.bn_beta
    return y, tape


def apply_running_update(params: EncoderParams, tape: ForwardTape,
                         momentum: float = BN_MOMENTUM) -> None:
    """EMA-update running statistics from a train-mode tape."""
    if tape.bn_batch_mean is None:
        raise ValueError("tape carries no batch statistics (infer mode?)")
    params.bn_running_mean = momentum * params.bn_running_mean + (1 - momentum) * tape.bn_batch_mean
    params.bn_running_var = momentum * params.bn_running_var + (1 - momentum) * tape.bn_batch_var


def backward(tape: ForwardTape, dout: np.ndarray,
             params: EncoderParams) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Exact gradients of a train-mode forward.

    Returns ({W_i, b_i, bn_gamma, bn_beta} gradients, gradient w.r.t. the
    input batch). The batch-norm path differentiates through the batch mean
    and variance.
    """
    if tape.mode != "train":
        raise ValueError("backward requires a train-mode tape")
    if len(tape.pre_acts) != len(params.weights):
        raise ValueError("tape does not match params (layer count)")
    mb = tape.batch_size
    if dout.shape != tape.bn_xhat.shape:
        raise ValueError(f"dout shape {dout.shape} != output shape {tape.bn_xhat.shape}")

    grads: dict[str, np.ndarray] = {
        "bn_gamma": (dout * tape.bn_xhat).sum(axis=0),
        "bn_beta": dout.sum(axis=0),
    }
    dxhat = dout * params.bn_gamma
    da = (tape.bn_inv_std / mb) * (
        mb * dxhat
        - dxhat.sum(axis=0)
        - tape.bn_xhat * (dxhat * tape.bn_xhat).sum(axis=0)
    )

    for i in range(len(params.weights) - 1, -1, -1):
        grads[f"W{i}"] = tape.inputs[i].T @ da
        grads[f"b{i}"] = da.sum(axis=0)
        dh = da @ params.weights[i].T
        if i == 0:
            return grads, dh
        if tape.drop_mults[i - 1] is not None:
            dh = dh * tape.drop_mults[i - 1]
        da = dh * (tape.pre_acts[i - 1] > 0)
    raise AssertionError("unreachable")


def represent(word: str, params: EncoderParams, spec: ProjectionSpec) -> np.ndarray:
    """Inference-mode representation of any nonempty string.

    Works for out-of-vocabulary words and misspellings; there is no lookup,
    the projection is computed from the characters.
    """
    y, _ = forward(word_input(word, spec)[None, :], params, mode="infer")
    return y[0]


def context_score(target_repr: np.ndarray, context_id: int, table: np.ndarray) -> float:
    """Pre-sigmoid logit v'(w_c) . v_P(w_t)."""
    if not 0 <= context_id < table.shape[0]:
        raise IndexError(f"context id {context_id} out of range [0, {table.shape[0]})")
    return float(table[context_id] @ target_repr)
