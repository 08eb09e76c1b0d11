"""Locality-sensitive binary projections over character features.

A word is mapped to a fixed-width bit vector P(w) by hashing its character
n-grams into 64-bit feature ids and accumulating, per bit position, a
Rademacher (+1/-1) sign stream derived from (seed, feature_id). The sign of
the accumulated sum gives the bit. Everything is a pure function of
(ProjectionSpec, word): no stored matrices, no per-word state, so the
featurizer costs O(|word| + T*d) memory regardless of vocabulary size.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)  # splitmix64 golden-ratio increment
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# interior separator for skip-bigram feature strings; keeps them in a
# namespace distinct from contiguous n-grams
_SKIP_SEP = "\x1f"


def _splitmix64(x: np.ndarray) -> np.ndarray:
    """Finalizer of the splitmix64 generator; uint64 in, uint64 out."""
    z = (x + _GAMMA) & _MASK64
    z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK64
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class ProjectionSpec:
    """Deterministic description of the featurizer.

    Two specs with equal fields produce bit-identical projections for every
    input, across processes and platforms.
    """

    seed: int = 1
    num_projections: int = 80
    bits_per_projection: int = 14
    ngram_orders: tuple[int, ...] = (1, 2, 3, 4)
    skipgram: bool = True

    def __post_init__(self):
        if self.num_projections < 1 or self.bits_per_projection < 1:
            raise ValueError("num_projections and bits_per_projection must be >= 1")
        if not self.ngram_orders or any(n < 1 for n in self.ngram_orders):
            raise ValueError("ngram_orders must be a nonempty set of positive ints")
        object.__setattr__(self, "ngram_orders", tuple(sorted(set(self.ngram_orders))))
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    @property
    def total_bits(self) -> int:
        return self.num_projections * self.bits_per_projection


@dataclass(frozen=True)
class BinaryProjection:
    """Packed bit vector of length spec.num_projections * spec.bits_per_projection."""

    packed: bytes
    n_bits: int

    def bits(self) -> np.ndarray:
        """Unpacked 0/1 uint8 array of length n_bits."""
        raw = np.frombuffer(self.packed, dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.n_bits]

    def popcount(self) -> int:
        return int(self.bits().sum())

    def hamming(self, other: "BinaryProjection") -> int:
        if self.n_bits != other.n_bits:
            raise ValueError("projections have different widths")
        a = np.frombuffer(self.packed, dtype=np.uint8)
        b = np.frombuffer(other.packed, dtype=np.uint8)
        # trailing pad bits are zero in both, so they never contribute
        return int(np.unpackbits(a ^ b).sum())


def feature_strings(word: str, spec: ProjectionSpec) -> list[str]:
    """Enumerate the character features of a word (with multiplicity).

    Features are n-grams of the boundary-marked string "^word$" for each
    order in spec.ngram_orders, plus skip-1 bigrams (chars two apart in the
    marked string) when spec.skipgram is set.
    """
    word = word.strip()
    if not word:
        raise ValueError("cannot featurize an empty word")
    marked = "^" + word + "$"
    feats: list[str] = []
    for order in spec.ngram_orders:
        feats.extend(marked[i : i + order] for i in range(len(marked) - order + 1))
    if spec.skipgram:
        feats.extend(marked[i] + _SKIP_SEP + marked[i + 2] for i in range(len(marked) - 2))
    return feats


def hash_feature(feature: str, seed: int) -> int:
    """Stable seeded 64-bit id for a feature string."""
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def extract_features(word: str, spec: ProjectionSpec) -> dict[int, int]:
    """Sparse feature map: hashed feature id -> occurrence count."""
    counts: dict[int, int] = {}
    for feat in feature_strings(word, spec):
        fid = hash_feature(feat, spec.seed)
        counts[fid] = counts.get(fid, 0) + 1
    return counts


def _sign_matrix(feature_ids: np.ndarray, spec: ProjectionSpec) -> np.ndarray:
    """(n_features, total_bits) matrix of +1/-1 signs, derived by hashing.

    Row f is the Rademacher stream for feature f: splitmix64 outputs keyed by
    (spec.seed, feature_id) unpacked to bits (bit 1 -> +1). Little-endian
    byte/bit order is forced so the layout is platform-independent.
    """
    n_bits = spec.total_bits
    n_blocks = (n_bits + 63) // 64
    fids = feature_ids.astype(np.uint64)
    base = _splitmix64(_splitmix64(fids) ^ np.uint64(spec.seed))
    counters = (np.arange(n_blocks, dtype=np.uint64) * _GAMMA) & _MASK64
    blocks = _splitmix64((base[:, None] + counters[None, :]) & _MASK64)
    raw = np.ascontiguousarray(blocks.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(raw.reshape(len(fids), -1), axis=1, bitorder="little")
    return (bits[:, :n_bits].astype(np.int64) * 2) - 1


def project(word: str, spec: ProjectionSpec) -> BinaryProjection:
    """Compute the binary LSH projection of a word.

    Bit k is 1 iff sum_f count_f * sign(seed, f, k) > 0; an exact zero sum
    gives bit 0. Deterministic in (spec, word) only.
    """
    feats = extract_features(word, spec)
    fids = np.fromiter(feats.keys(), dtype=np.uint64, count=len(feats))
    counts = np.fromiter(feats.values(), dtype=np.int64, count=len(feats))
    signs = _sign_matrix(fids, spec)
    acc = counts @ signs
    bits = (acc > 0).astype(np.uint8)
    packed = np.packbits(bits, bitorder="little").tobytes()
    return BinaryProjection(packed=packed, n_bits=spec.total_bits)


def projection_as_input(p: BinaryProjection) -> np.ndarray:
    """Zero-centered encoder input: bit 1 -> +1.0, bit 0 -> -1.0."""
    return p.bits().astype(np.float64) * 2.0 - 1.0


def word_input(word: str, spec: ProjectionSpec) -> np.ndarray:
    """Convenience: projection_as_input(project(word, spec))."""
    return projection_as_input(project(word, spec))
