"""Shared fixtures: synthetic corpora and desk-scale trained models."""

from __future__ import annotations

import numpy as np
import pytest

from npsg.config import TrainConfig
from npsg.corpus import Vocabulary, build_vocabulary, iter_tokens
from npsg.projector import ProjectionSpec
from npsg.train import train, train_baseline_sg

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def make_cluster_words(rng: np.random.Generator, count: int = 200,
                       lengths: tuple[int, int] = (4, 8)) -> list[str]:
    """Distinct random lowercase words."""
    seen: set[str] = set()
    words: list[str] = []
    while len(words) < count:
        n = int(rng.integers(lengths[0], lengths[1] + 1))
        w = "".join(rng.choice(list(_LETTERS), size=n))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def write_cluster_corpus(path, seed: int = 11, n_lines: int = 20_000,
                         line_len: int = 10) -> tuple[list[str], list[str]]:
    """Two-topic corpus: every line draws all its tokens from one cluster.

    Lines bound context windows, so co-occurrence never crosses clusters.
    Returns the two cluster word lists.
    """
    rng = np.random.default_rng(seed)
    words = make_cluster_words(rng, 200)
    cluster_a, cluster_b = words[:100], words[100:]
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(n_lines):
            pool = cluster_a if rng.random() < 0.5 else cluster_b
            fh.write(" ".join(rng.choice(pool, size=line_len)) + "\n")
    return cluster_a, cluster_b


def desk_config(reg_lambda: float = 0.01) -> TrainConfig:
    """Training setup sized for the synthetic corpus (minutes, not days)."""
    return TrainConfig(epochs=5, batch_size=256, hidden_sizes=(64, 32),
                       negatives_k=5, learning_rate=0.008, window_max=3,
                       subsample_t=1e-3, perturb_prob=0.4, dropout_p=0.15,
                       reg_lambda=reg_lambda, seed=13)


DESK_SPEC = ProjectionSpec(seed=5, num_projections=16, bits_per_projection=8)


@pytest.fixture(scope="session")
def cluster_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "clusters.txt"
    cluster_a, cluster_b = write_cluster_corpus(path)
    return {"path": str(path), "cluster_a": cluster_a, "cluster_b": cluster_b}


@pytest.fixture(scope="session")
def cluster_vocab(cluster_corpus) -> Vocabulary:
    return build_vocabulary(iter_tokens(cluster_corpus["path"]))


@pytest.fixture(scope="session")
def trained_npsg(cluster_corpus, cluster_vocab):
    model, summary = train(cluster_corpus["path"], cluster_vocab,
                           desk_config(reg_lambda=0.01), DESK_SPEC)
    return model, summary


@pytest.fixture(scope="session")
def trained_npsg_noreg(cluster_corpus, cluster_vocab):
    model, summary = train(cluster_corpus["path"], cluster_vocab,
                           desk_config(reg_lambda=0.0), DESK_SPEC)
    return model, summary


@pytest.fixture(scope="session")
def trained_baseline(cluster_corpus, cluster_vocab):
    model, summary = train_baseline_sg(cluster_corpus["path"], cluster_vocab,
                                       desk_config(reg_lambda=0.0))
    return model, summary


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Twelve-word fruit/furniture corpus for fast unit-level training."""
    rng = np.random.default_rng(0)
    fruit = ["apple", "banana", "cherry", "grape", "melon", "plum"]
    furniture = ["table", "chair", "couch", "shelf", "stool", "bench"]
    path = tmp_path_factory.mktemp("tiny") / "tiny.txt"
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(400):
            pool = fruit if rng.random() < 0.5 else furniture
            fh.write(" ".join(rng.choice(pool, size=8)) + "\n")
    return str(path)


@pytest.fixture(scope="session")
def tiny_vocab(tiny_corpus) -> Vocabulary:
    return build_vocabulary(iter_tokens(tiny_corpus))
