"""Model kinds and versioned binary persistence.

Container layout (all integers little-endian):

    magic "NPSG" | u16 format_version | u8 model_kind
    [kind 0] projection-spec block: u32 length + canonical JSON
    [kind 1] vocabulary block:      u32 length + newline-joined words
    config block:                   u32 length + canonical JSON
    u32 tensor count, then per tensor:
        u16 name length | name utf-8 | u8 ndim | u32 per dim | f32 LE data
    u64 checksum (blake2b-8) of every preceding byte

The transferable artifact is the encoder: context tables are training
state and are only written under an explicit flag.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from npsg.config import TrainConfig
from npsg.corpus import OOVError
from npsg.encoder import EncoderParams, represent
from npsg.projector import ProjectionSpec

MAGIC = b"NPSG"
FORMAT_VERSION = 1
KIND_NPSG = 0
KIND_BASELINE = 1


class ModelFormatError(ValueError):
    """Raised for malformed, truncated, or corrupt model files."""


@dataclass
class NPSGModel:
    """Projection skip-gram model: featurizer spec + encoder parameters."""

    spec: ProjectionSpec
    params: EncoderParams
    config: TrainConfig
    context_table: np.ndarray | None = None

    kind = KIND_NPSG

    @property
    def output_dim(self) -> int:
        return self.params.output_dim

    def represent(self, word: str) -> np.ndarray:
        """Representation of any nonempty string; no vocabulary involved."""
        return represent(word, self.params, self.spec)


@dataclass
class BaselineSGModel:
    """Vanilla skip-gram baseline: per-word input embedding lookup."""

    words: list[str]
    input_table: np.ndarray
    config: TrainConfig
    context_table: np.ndarray | None = None

    kind = KIND_BASELINE

    def __post_init__(self):
        self.id_of = {w: i for i, w in enumerate(self.words)}

    @property
    def output_dim(self) -> int:
        return self.input_table.shape[1]

    def represent(self, word: str) -> np.ndarray:
        try:
            return np.asarray(self.input_table[self.id_of[word]], dtype=np.float64)
        except KeyError:
            raise OOVError(word) from None


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _spec_to_json(spec: ProjectionSpec) -> bytes:
    return _canonical_json({
        "seed": spec.seed,
        "num_projections": spec.num_projections,
        "bits_per_projection": spec.bits_per_projection,
        "ngram_orders": list(spec.ngram_orders),
        "skipgram": spec.skipgram,
    })


def _config_to_json(config: TrainConfig) -> bytes:
    d = dataclasses.asdict(config)
    d["hidden_sizes"] = list(d["hidden_sizes"])
    return _canonical_json(d)


def _block(payload: bytes) -> bytes:
    return struct.pack("<I", len(payload)) + payload


def _tensor_bytes(name: str, arr: np.ndarray) -> bytes:
    data = np.ascontiguousarray(arr, dtype="<f4")
    name_b = name.encode("utf-8")
    head = struct.pack("<H", len(name_b)) + name_b + struct.pack("<B", data.ndim)
    head += b"".join(struct.pack("<I", d) for d in data.shape)
    return head + data.tobytes()


def _checksum(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=8).digest()


def _npsg_tensors(model: NPSGModel, include_context_table: bool) -> list[tuple[str, np.ndarray]]:
    p = model.params
    tensors: list[tuple[str, np.ndarray]] = []
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        tensors.append((f"W{i}", w))
        tensors.append((f"b{i}", b))
    tensors += [("bn_gamma", p.bn_gamma), ("bn_beta", p.bn_beta),
                ("bn_running_mean", p.bn_running_mean),
                ("bn_running_var", p.bn_running_var)]
    if include_context_table:
        if model.context_table is None:
            raise ValueError("model carries no context table to include")
        tensors.append(("context_table", model.context_table))
    return tensors


def save_model(model: NPSGModel | BaselineSGModel, path: str,
               include_context_table: bool = False) -> None:
    """Serialize a model; save -> load -> save is byte-identical."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", FORMAT_VERSION)
    out += struct.pack("<B", model.kind)
    if model.kind == KIND_NPSG:
        out += _block(_spec_to_json(model.spec))
        tensors = _npsg_tensors(model, include_context_table)
    else:
        out += _block("\n".join(model.words).encode("utf-8"))
        tensors = [("input_table", model.input_table)]
        if include_context_table:
            if model.context_table is None:
                raise ValueError("model carries no context table to include")
            tensors.append(("context_table", model.context_table))
    out += _block(_config_to_json(model.config))
    out += struct.pack("<I", len(tensors))
    for name, arr in tensors:
        out += _tensor_bytes(name, arr)
    out += _checksum(bytes(out))
    with open(path, "wb") as fh:
        fh.write(bytes(out))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("truncated model file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def block(self) -> bytes:
        return self.take(self.u32())


def load_model(path: str) -> NPSGModel | BaselineSGModel:
    """Read a model container, verifying magic and checksum first."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 2 + 1 + 8:
        raise ModelFormatError("file too short to be a model container")
    if data[:4] != MAGIC:
        raise ModelFormatError("bad magic: not a model container")
    if _checksum(data[:-8]) != data[-8:]:
        raise ModelFormatError("checksum mismatch: corrupt model file")

    r = _Reader(data[:-8])
    r.take(4)
    version = r.u16()
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {version}")
    kind = r.u8()
    if kind not in (KIND_NPSG, KIND_BASELINE):
        raise ModelFormatError(f"unknown model kind {kind}")

    spec = None
    words = None
    if kind == KIND_NPSG:
        raw = json.loads(r.block().decode("utf-8"))
        raw["ngram_orders"] = tuple(raw["ngram_orders"])
        spec = ProjectionSpec(**raw)
    else:
        words = r.block().decode("utf-8").split("\n")
    cfg_raw = json.loads(r.block().decode("utf-8"))
    cfg_raw["hidden_sizes"] = tuple(cfg_raw["hidden_sizes"])
    config = TrainConfig(**cfg_raw)

    tensors: dict[str, np.ndarray] = {}
    order: list[str] = []
    for _ in range(r.u32()):
        name = r.take(r.u16()).decode("utf-8")
        ndim = r.u8()
        shape = tuple(r.u32() for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(r.take(4 * count), dtype="<f4").reshape(shape)
        tensors[name] = arr.astype(np.float32)
        order.append(name)
    if r.pos != len(r.data):
        raise ModelFormatError("trailing bytes after tensor sections")

    if kind == KIND_BASELINE:
        if "input_table" not in tensors:
            raise ModelFormatError("baseline container missing input_table")
        return BaselineSGModel(words=words, input_table=tensors["input_table"],
                               config=config, context_table=tensors.get("context_table"))

    n_affine = sum(1 for n in order if n.startswith("W") and n[1:].isdigit())
    try:
        weights = [tensors[f"W{i}"] for i in range(n_affine)]
        biases = [tensors[f"b{i}"] for i in range(n_affine)]
        layer_sizes = (weights[0].shape[0], *(w.shape[1] for w in weights))
        params = EncoderParams(
            layer_sizes=layer_sizes,
            weights=weights,
            biases=biases,
            bn_gamma=tensors["bn_gamma"],
            bn_beta=tensors["bn_beta"],
            bn_running_mean=tensors["bn_running_mean"],
            bn_running_var=tensors["bn_running_var"],
            dropout_p=config.dropout_p,
        )
    except (KeyError, IndexError) as exc:
        raise ModelFormatError(f"container missing tensor: {exc}") from None
    return NPSGModel(spec=spec, params=params, config=config,
                     context_table=tensors.get("context_table"))
