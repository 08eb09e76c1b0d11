"""Word-similarity benchmarking and nearest-neighbor retrieval.

Dataset files are UTF-8 lines `word1<TAB>word2<TAB>score`; lines starting
with '#' are comments. Model quality is the Spearman rank correlation
between model cosines and the human scores. The projection model scores
every pair (coverage 1.0); the baseline skips pairs with an
out-of-vocabulary member and reports the retained fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from npsg.corpus import OOVError

_EPS = 1e-12


@dataclass(frozen=True)
class SimilarityDataset:
    """Human-rated word pairs."""

    pairs: list[tuple[str, str, float]]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("similarity dataset is empty")
        if any(not np.isfinite(s) for _, _, s in self.pairs):
            raise ValueError("similarity dataset contains non-finite scores")

    @classmethod
    def load(cls, path: str) -> "SimilarityDataset":
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(
                        f"{path}:{lineno}: expected 'word1<TAB>word2<TAB>score'")
                pairs.append((parts[0], parts[1], float(parts[2])))
        return cls(pairs=pairs)


@dataclass
class SimilarityResult:
    dataset: str
    rho: float
    coverage: float
    n_pairs: int
    n_used: int
    n_zero_vectors: int = 0

    def report(self) -> str:
        return "\n".join([
            f"dataset = {self.dataset}",
            f"rho = {self.rho:.6f}",
            f"coverage = {self.coverage:.6f}",
            f"n_pairs = {self.n_pairs}",
            f"n_used = {self.n_used}",
        ])


@dataclass
class NeighborResult:
    """Ranked neighbors of a query; scores non-increasing, query excluded."""

    query: str
    neighbors: list[tuple[str, float]]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u . v / (||u|| ||v||), epsilon-guarded against zero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    denom = max(float(np.linalg.norm(u) * np.linalg.norm(v)), _EPS)
    return float(u @ v) / denom


def _fractional_ranks(xs: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); tied values share the mean of their ranks."""
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs))
    sorted_vals = xs[order]
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman's rho: Pearson correlation of tie-averaged ranks."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("spearman needs two equal-length 1-d sequences")
    if len(xs) < 2:
        raise ValueError("spearman needs at least two observations")
    rx = _fractional_ranks(xs)
    ry = _fractional_ranks(ys)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("correlation undefined: an input has constant ranks")
    return float(dx @ dy) / np.sqrt(vx * vy)


def eval_similarity(model, dataset: SimilarityDataset,
                    name: str = "dataset") -> SimilarityResult:
    """Spearman correlation between model cosines and human scores."""
    human = []
    scores = []
    n_zero = 0
    for w1, w2, gold in dataset.pairs:
        try:
            v1 = model.represent(w1)
            v2 = model.represent(w2)
        except OOVError:
            continue
        n1 = np.linalg.norm(v1)
        n2 = np.linalg.norm(v2)
        if n1 < _EPS or n2 < _EPS:
            n_zero += 1
        human.append(gold)
        scores.append(cosine(v1, v2))
    if not human:
        raise ValueError("no dataset pair was scorable by the model")
    rho = spearman(human, scores)
    return SimilarityResult(dataset=name, rho=rho,
                            coverage=len(human) / len(dataset.pairs),
                            n_pairs=len(dataset.pairs), n_used=len(human),
                            n_zero_vectors=n_zero)


def nearest_neighbors(model, query: str, candidates: list[str],
                      topk: int = 10) -> NeighborResult:
    """Top-k candidates by cosine to the query's representation.

    The query string itself is excluded; candidates the model cannot
    represent (baseline OOV) are skipped.
    """
    if not candidates:
        raise ValueError("candidate list is empty")
    if topk < 1:
        raise ValueError("topk must be >= 1")
    q = model.represent(query)
    scored: list[tuple[str, float]] = []
    seen = set()
    for cand in candidates:
        if cand == query or cand in seen:
            continue
        seen.add(cand)
        try:
            v = model.represent(cand)
        except OOVError:
            continue
        scored.append((cand, cosine(q, v)))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return NeighborResult(query=query, neighbors=scored[:topk])
