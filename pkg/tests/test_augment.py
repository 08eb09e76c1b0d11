"""Character perturbation operations."""

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npsg.augment import duplicate, insert, maybe_perturb, swap

WORDS = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=12)
SEEDS = st.integers(min_value=0, max_value=2**32 - 1)


class TestInsert:
    def test_identity_at_zero(self):
        assert insert("sample", 0) == "sample"

    def test_short_word_unchanged(self):
        rng = np.random.default_rng(0)
        assert insert("a", 3, rng=rng) == "a"
        assert insert("", 3, rng=rng) == ""

    def test_documented_example_reachable(self):
        # one interior insertion can produce samnple
        hits = {insert("sample", 1, rng=np.random.default_rng(s)) for s in range(200)}
        assert "samnple" in hits

    @settings(max_examples=80, deadline=None)
    @given(word=st.text(alphabet="abcdefgh", min_size=2, max_size=10),
           n=st.integers(0, 3), seed=SEEDS)
    def test_contract(self, word, n, seed):
        out = insert(word, n, rng=np.random.default_rng(seed))
        assert len(out) == len(word) + n
        assert out[0] == word[0] and out[-1] == word[-1]

    def test_errors(self):
        with pytest.raises(ValueError):
            insert("sample", -1)
        with pytest.raises(ValueError):
            insert("sample", 1, charvocab="")


class TestSwap:
    def test_identity_at_zero(self):
        assert swap("sample", 0) == "sample"

    def test_short_word_unchanged(self):
        assert swap("abc", 2, rng=np.random.default_rng(0)) == "abc"

    def test_documented_example_reachable(self):
        hits = {swap("sample", 1, rng=np.random.default_rng(s)) for s in range(200)}
        assert "sapmle" in hits

    def test_always_changes_word_when_interior_distinct(self):
        # two distinct positions are swapped; "abcd" has one interior pair
        outs = {swap("abcd", 1, rng=np.random.default_rng(s)) for s in range(50)}
        assert outs == {"acbd"}

    @settings(max_examples=80, deadline=None)
    @given(word=st.text(alphabet="abcdefgh", min_size=4, max_size=10),
           n=st.integers(0, 3), seed=SEEDS)
    def test_contract(self, word, n, seed):
        out = swap(word, n, rng=np.random.default_rng(seed))
        assert len(out) == len(word)
        assert sorted(out) == sorted(word)
        assert out[0] == word[0] and out[-1] == word[-1]


class TestDuplicate:
    def test_identity_at_zero(self):
        assert duplicate("sample", 0) == "sample"

    def test_documented_example_reachable(self):
        hits = {duplicate("sample", 1, rng=np.random.default_rng(s)) for s in range(200)}
        assert "saample" in hits

    def test_single_char(self):
        assert duplicate("a", 1, rng=np.random.default_rng(0)) == "aa"

    def test_empty_word_error(self):
        with pytest.raises(ValueError):
            duplicate("", 1)

    @settings(max_examples=80, deadline=None)
    @given(word=st.text(alphabet="abcdefgh", min_size=1, max_size=10),
           seed=SEEDS)
    def test_recoverable_by_deleting_one_of_an_adjacent_pair(self, word, seed):
        out = duplicate(word, 1, rng=np.random.default_rng(seed))
        assert len(out) == len(word) + 1
        recovered = {out[:i] + out[i + 1:]
                     for i in range(len(out)) if 0 < i and out[i] == out[i - 1]}
        assert word in recovered


class TestMaybePerturb:
    def test_prob_zero_identity(self):
        rng = np.random.default_rng(0)
        assert all(maybe_perturb("sample", 0.0, rng) == "sample" for _ in range(100))

    def test_prob_validated(self):
        with pytest.raises(ValueError):
            maybe_perturb("sample", 1.5, np.random.default_rng(0))

    def test_deterministic_under_seed(self):
        a = [maybe_perturb("sample", 0.4, np.random.default_rng(7)) for _ in range(1)]
        b = [maybe_perturb("sample", 0.4, np.random.default_rng(7)) for _ in range(1)]
        assert a == b

    def test_perturbed_fraction(self):
        rng = np.random.default_rng(3)
        changed = sum(maybe_perturb("sample", 0.4, rng) != "sample"
                      for _ in range(20_000))
        # swaps of equal letters can be invisible, so allow a little slack below 0.4
        assert 0.35 <= changed / 20_000 <= 0.42

    def test_op_mix_roughly_uniform(self):
        rng = np.random.default_rng(5)
        kinds = Counter()
        for _ in range(20_000):
            out = maybe_perturb("abcdef", 1.0, rng)
            if len(out) == 7:
                kinds["grew"] += 1  # insert or duplicate
            elif sorted(out) == sorted("abcdef") and out != "abcdef":
                kinds["swap"] += 1
            else:
                kinds["other"] += 1
        assert kinds["swap"] == pytest.approx(20_000 / 3, rel=0.06)
        assert kinds["grew"] == pytest.approx(2 * 20_000 / 3, rel=0.06)
