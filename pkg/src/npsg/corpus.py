"""Corpus ingestion: vocabulary, noise distribution, and training pairs.

Input corpora are UTF-8 plain text with tokens separated by ASCII
whitespace. Windows never cross line boundaries, so a line plays the role
of a sentence/document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np


class EmptyCorpusError(ValueError):
    """Raised when a corpus contains no tokens."""


class OOVError(KeyError):
    """Raised for words outside the vocabulary where an id is required."""


@dataclass
class Vocabulary:
    """Frequency-ranked closed vocabulary.

    words are sorted by descending count (ties broken lexicographically);
    total_tokens counts every corpus token, including ones dropped by the
    max_vocab cutoff, so relative frequencies are true corpus frequencies.
    """

    words: list[str]
    counts: np.ndarray
    total_tokens: int
    id_of: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.id_of = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.id_of

    def index(self, word: str) -> int:
        try:
            return self.id_of[word]
        except KeyError:
            raise OOVError(word) from None

    def save(self, path: str) -> None:
        """Write `word<TAB>count` lines in descending-count order."""
        with open(path, "w", encoding="utf-8") as fh:
            for word, count in zip(self.words, self.counts):
                fh.write(f"{word}\t{int(count)}\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        """Read a vocabulary file.

        The file stores only retained words, so total_tokens is restored as
        the sum of retained counts (a lower bound on the original corpus
        size when max_vocab truncated it).
        """
        words: list[str] = []
        counts: list[int] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    word, count = line.split("\t")
                    counts.append(int(count))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: expected 'word<TAB>count'") from None
                words.append(word)
        if not words:
            raise EmptyCorpusError(f"vocabulary file {path} is empty")
        return cls(words=words, counts=np.array(counts, dtype=np.int64),
                   total_tokens=int(sum(counts)))


def build_vocabulary(corpus: Iterable[str], max_vocab: int = 100_000) -> Vocabulary:
    """Count tokens and keep the max_vocab most frequent.

    corpus is any iterable of token strings. Rank order is count descending,
    ties lexicographic.
    """
    if max_vocab < 1:
        raise ValueError("max_vocab must be >= 1")
    counts: dict[str, int] = {}
    total = 0
    for token in corpus:
        total += 1
        counts[token] = counts.get(token, 0) + 1
    if total == 0:
        raise EmptyCorpusError("corpus contains no tokens")
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:max_vocab]
    return Vocabulary(
        words=[w for w, _ in ranked],
        counts=np.array([c for _, c in ranked], dtype=np.int64),
        total_tokens=total,
    )


def iter_tokens(paths: str | Iterable[str], lowercase: bool = False) -> Iterator[str]:
    """Stream whitespace-separated tokens from one or more text files."""
    if isinstance(paths, str):
        paths = [paths]
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if lowercase:
                    line = line.lower()
                yield from line.split()


def iter_token_lines(paths: str | Iterable[str], lowercase: bool = False) -> Iterator[list[str]]:
    """Stream each nonempty line as a token list (window boundary unit)."""
    if isinstance(paths, str):
        paths = [paths]
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if lowercase:
                    line = line.lower()
                tokens = line.split()
                if tokens:
                    yield tokens


def keep_probability(word: str, vocab: Vocabulary, t: float) -> float:
    """Subsampling keep probability sqrt(t / freq(w)), clamped to [0, 1].

    freq(w) is the relative corpus frequency counts[w] / total_tokens;
    equivalently the drop rule P_drop = 1 - sqrt(t / freq).
    """
    if t <= 0:
        raise ValueError("subsampling threshold t must be positive")
    idx = vocab.index(word)
    freq = vocab.counts[idx] / vocab.total_tokens
    return min(1.0, math.sqrt(t / freq))


@dataclass
class NoiseTable:
    """Constant-time sampler for the smoothed unigram noise distribution.

    weights[i] = counts[i] ** 0.75; sampling uses Walker's alias method, so
    a draw is two uniforms regardless of vocabulary size.
    """

    weights: np.ndarray
    _alias: np.ndarray = field(init=False, repr=False)
    _accept: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.size == 0:
            raise EmptyCorpusError("cannot build a noise table over an empty vocabulary")
        if np.any(self.weights < 0):
            raise ValueError("noise weights must be non-negative")
        probs = self.weights / self.weights.sum()
        self._alias, self._accept = _alias_setup(probs)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray | int:
        """Draw word ids; reproducible for a given rng state."""
        if size is None:
            k = int(rng.integers(len(self.weights)))
            return int(k if rng.random() < self._accept[k] else self._alias[k])
        k = rng.integers(len(self.weights), size=size)
        keep = rng.random(size=size) < self._accept[k]
        return np.where(keep, k, self._alias[k])

    def probabilities(self) -> np.ndarray:
        """Exact per-word sampling probabilities implied by the alias table."""
        n = len(self.weights)
        probs = self._accept.copy()
        np.add.at(probs, self._alias, 1.0 - self._accept)
        return probs / n


def _alias_setup(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Walker alias construction: O(n) setup, O(1) draws."""
    n = len(probs)
    accept = probs * n
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if accept[i] < 1.0]
    large = [i for i in range(n) if accept[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        alias[s] = l
        accept[l] -= 1.0 - accept[s]
        (small if accept[l] < 1.0 else large).append(l)
    # leftovers are 1.0 up to rounding
    for i in small + large:
        accept[i] = 1.0
    return alias, accept


def build_noise_table(vocab: Vocabulary) -> NoiseTable:
    """Noise distribution P_n(w) proportional to count(w)^(3/4)."""
    return NoiseTable(weights=np.power(vocab.counts.astype(np.float64), 0.75))


@dataclass
class PairStream:
    """Streams (target, context) token pairs from one token sequence.

    Tokens outside the vocabulary are removed first (they neither emit pairs
    nor occupy window slots); each surviving token is then kept with
    probability sqrt(t / freq), and for every surviving target position a
    window W is drawn uniformly from {1..window_max} (or pinned to
    window_max when fixed_window is set). All in-window neighbors are
    emitted as contexts.
    """

    source: list[str]
    vocab: Vocabulary
    window_max: int
    rng_seed: int | np.random.Generator = 0
    keep_threshold: float = 1e-5
    fixed_window: bool = False

    def __post_init__(self):
        if self.window_max < 1:
            raise ValueError("window_max must be >= 1")
        if isinstance(self.rng_seed, np.random.Generator):
            self._rng = self.rng_seed
        else:
            self._rng = np.random.default_rng(self.rng_seed)
        self._iter = self._generate()

    def _generate(self) -> Iterator[tuple[str, str]]:
        ids = [self.vocab.id_of[tok] for tok in self.source if tok in self.vocab.id_of]
        if len(ids) < 2:
            return
        ids_arr = np.array(ids, dtype=np.int64)
        keep = _keep_probs(self.vocab, self.keep_threshold)
        survived = ids_arr[self._rng.random(len(ids_arr)) < keep[ids_arr]]
        m = len(survived)
        if m < 2:
            return
        if self.fixed_window:
            windows = np.full(m, self.window_max, dtype=np.int64)
        else:
            windows = self._rng.integers(1, self.window_max + 1, size=m)
        words = self.vocab.words
        for t in range(m):
            w = int(windows[t])
            target = words[survived[t]]
            for c in range(max(0, t - w), min(m, t + w + 1)):
                if c != t:
                    yield target, words[survived[c]]

    def next_pairs(self, max_pairs: int | None = None) -> list[tuple[str, str]]:
        """Up to max_pairs further pairs; empty list once exhausted."""
        if max_pairs is None:
            return list(self._iter)
        out = []
        for pair in self._iter:
            out.append(pair)
            if len(out) >= max_pairs:
                break
        return out

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return self._iter


def _keep_probs(vocab: Vocabulary, t: float) -> np.ndarray:
    """Vector of per-id subsampling keep probabilities."""
    if t <= 0:
        raise ValueError("subsampling threshold t must be positive")
    if math.isinf(t):
        return np.ones(len(vocab))
    freqs = vocab.counts.astype(np.float64) / vocab.total_tokens
    return np.minimum(1.0, np.sqrt(t / freqs))
