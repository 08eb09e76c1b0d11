"""Misspelling-style character perturbations for training augmentation.

Three operations: insert random characters at interior positions, swap two
interior characters, duplicate a character in place. Words too short for an
operation pass through unchanged so the training loop never has to special
case them.
"""

from __future__ import annotations

import string

import numpy as np

DEFAULT_CHAR_VOCAB = string.ascii_lowercase

_OPS = ("insert", "swap", "duplicate")


def insert(word: str, n: int, charvocab: str = DEFAULT_CHAR_VOCAB,
           rng: np.random.Generator | None = None) -> str:
    """Insert n random characters at interior positions.

    The original first and last characters stay at the ends. Words shorter
    than 2 characters are returned unchanged.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not charvocab:
        raise ValueError("character vocabulary is empty")
    if len(word) < 2 or n == 0:
        return word
    rng = rng or np.random.default_rng()
    chars = list(word)
    for _ in range(n):
        pos = int(rng.integers(1, len(chars)))  # between first and last
        chars.insert(pos, charvocab[int(rng.integers(len(charvocab)))])
    return "".join(chars)


def swap(word: str, n: int, rng: np.random.Generator | None = None) -> str:
    """Transpose two distinct interior characters, n independent times.

    Needs at least two interior positions (length >= 4); shorter words are
    returned unchanged. Length, character multiset, and the first/last
    characters are all preserved.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if len(word) < 4 or n == 0:
        return word
    rng = rng or np.random.default_rng()
    chars = list(word)
    interior = len(chars) - 2
    for _ in range(n):
        i = 1 + int(rng.integers(interior))
        j = 1 + int(rng.integers(interior - 1))
        if j >= i:
            j += 1
        chars[i], chars[j] = chars[j], chars[i]
    return "".join(chars)


def duplicate(word: str, n: int, rng: np.random.Generator | None = None) -> str:
    """Repeat a randomly chosen character adjacent to itself, n times.

    Any position may be duplicated, including the first and last.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not word:
        raise ValueError("cannot perturb an empty word")
    if n == 0:
        return word
    rng = rng or np.random.default_rng()
    chars = list(word)
    for _ in range(n):
        pos = int(rng.integers(len(chars)))
        chars.insert(pos, chars[pos])
    return "".join(chars)


def maybe_perturb(word: str, prob: float, rng: np.random.Generator,
                  charvocab: str = DEFAULT_CHAR_VOCAB) -> str:
    """With probability prob, apply one uniformly chosen op with n=1."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError("prob must be in [0, 1]")
    if prob == 0.0 or rng.random() >= prob:
        return word
    op = _OPS[int(rng.integers(len(_OPS)))]
    if op == "insert":
        return insert(word, 1, charvocab, rng)
    if op == "swap":
        return swap(word, 1, rng)
    return duplicate(word, 1, rng)
