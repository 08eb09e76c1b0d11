"""Encoder forward/backward, batch normalization, and represent()."""

import numpy as np
import pytest
from gradcheck import finite_difference_grad, relative_error

from npsg.encoder import (BN_EPS, BN_MOMENTUM, EncoderParams,
                          apply_running_update, backward, context_score,
                          encoder_param_count, forward, init_context_table,
                          init_encoder, represent)
from npsg.projector import ProjectionSpec
from conftest import make_cluster_words


def small_params(sizes=(12, 8, 5), dropout_p=0.0, seed=0) -> EncoderParams:
    return init_encoder(sizes, dropout_p, np.random.default_rng(seed))


class TestParamCount:
    def test_closed_form_examples(self):
        assert encoder_param_count((12, 8, 5)) == 12 * 8 + 8 + 8 * 5 + 5 + 4 * 5
        assert encoder_param_count((1120, 2048, 100)) == 2_501_108

    def test_matches_actual_tensors(self):
        p = small_params((7, 6, 4, 3))
        numel = sum(w.size for w in p.weights) + sum(b.size for b in p.biases)
        numel += p.bn_gamma.size + p.bn_beta.size
        numel += p.bn_running_mean.size + p.bn_running_var.size
        assert numel == encoder_param_count((7, 6, 4, 3))


class TestInit:
    def test_xavier_bounds_and_identity_bn(self):
        p = small_params((12, 8, 5))
        for w, (fi, fo) in zip(p.weights, [(12, 8), (8, 5)]):
            limit = np.sqrt(6.0 / (fi + fo))
            assert np.abs(w).max() <= limit
            assert w.shape == (fi, fo)
        assert all(not b.any() for b in p.biases)
        assert (p.bn_gamma == 1).all() and (p.bn_beta == 0).all()
        assert (p.bn_running_mean == 0).all() and (p.bn_running_var == 1).all()

    def test_context_table_range(self):
        t = init_context_table(50, 7, np.random.default_rng(0))
        assert t.shape == (50, 7)
        assert np.abs(t).max() <= 1.0

    def test_shape_validation(self):
        p = small_params()
        with pytest.raises(ValueError):
            EncoderParams(layer_sizes=(12, 8, 5), weights=[p.weights[0]],
                          biases=p.biases, bn_gamma=p.bn_gamma,
                          bn_beta=p.bn_beta, bn_running_mean=p.bn_running_mean,
                          bn_running_var=p.bn_running_var)


class TestForward:
    def test_zero_params_infer_zero_output(self):
        p = small_params()
        for w in p.weights:
            w[:] = 0.0
        y, _ = forward(np.ones((3, 12)), p, mode="infer")
        assert np.allclose(y, 0.0)

    def test_identity_hidden_layer(self):
        # non-negative inputs through an identity affine: ReLU is a no-op,
        # so the output is just the batch-normalized final affine
        p = small_params((4, 4, 3))
        p.weights[0][:] = np.eye(4)
        p.biases[0][:] = 0.0
        x = np.abs(np.random.default_rng(1).normal(size=(6, 4)))
        y, _ = forward(x, p, mode="train")
        a = x @ p.weights[1] + p.biases[1]
        xhat = (a - a.mean(axis=0)) / np.sqrt(a.var(axis=0) + BN_EPS)
        assert np.allclose(y, xhat, atol=1e-12)

    def test_train_output_statistics(self):
        # identity gamma/beta: returned activations are the normalized ones
        p = small_params((12, 8, 5), dropout_p=0.3)
        x = np.random.default_rng(2).normal(size=(64, 12))
        y, _ = forward(x, p, mode="train", rng=np.random.default_rng(3))
        assert np.abs(y.mean(axis=0)).max() < 1e-6
        assert np.abs(y.var(axis=0) - 1.0).max() < 1e-3  # eps shifts var slightly

    def test_infer_uses_running_stats_and_mutates_nothing(self):
        p = small_params()
        p.bn_running_mean[:] = 1.5
        p.bn_running_var[:] = 4.0
        before = (p.bn_running_mean.copy(), p.bn_running_var.copy())
        x = np.random.default_rng(4).normal(size=(5, 12))
        y, _ = forward(x, p, mode="infer")
        a = np.maximum(x @ p.weights[0] + p.biases[0], 0.0) @ p.weights[1] + p.biases[1]
        assert np.allclose(y, (a - 1.5) / np.sqrt(4.0 + BN_EPS))
        assert np.array_equal(p.bn_running_mean, before[0])
        assert np.array_equal(p.bn_running_var, before[1])

    def test_running_stats_ema(self):
        p = small_params()
        x = np.random.default_rng(5).normal(size=(16, 12))
        _, tape = forward(x, p, mode="train", update_running=False)
        mean0 = p.bn_running_mean.copy()
        var0 = p.bn_running_var.copy()
        apply_running_update(p, tape)
        assert np.allclose(p.bn_running_mean,
                           BN_MOMENTUM * mean0 + (1 - BN_MOMENTUM) * tape.bn_batch_mean)
        assert np.allclose(p.bn_running_var,
                           BN_MOMENTUM * var0 + (1 - BN_MOMENTUM) * tape.bn_batch_var)

    def test_update_running_flag(self):
        p = small_params()
        x = np.random.default_rng(6).normal(size=(8, 12))
        before = p.bn_running_mean.copy()
        forward(x, p, mode="train", update_running=False)
        assert np.array_equal(p.bn_running_mean, before)
        forward(x, p, mode="train")
        assert not np.array_equal(p.bn_running_mean, before)

    def test_errors(self):
        p = small_params(dropout_p=0.5)
        x = np.zeros((4, 12))
        with pytest.raises(ValueError):
            forward(x, p, mode="test")
        with pytest.raises(ValueError):
            forward(np.zeros((4, 11)), p, mode="infer")
        with pytest.raises(ValueError):
            forward(np.zeros((1, 12)), p, mode="train", rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            forward(x, p, mode="train")  # dropout needs an rng


class TestBackward:
    def test_zero_dout_zero_grads(self):
        p = small_params()
        x = np.random.default_rng(7).normal(size=(4, 12))
        y, tape = forward(x, p, mode="train")
        grads, dx = backward(tape, np.zeros_like(y), p)
        assert all(not g.any() for g in grads.values())
        assert not dx.any()

    def _fd_check(self, dropout_p: float, sizes=(12, 8, 5), mb=4):
        p = small_params(sizes, dropout_p=dropout_p, seed=8)
        jitter = np.random.default_rng(14)
        for b in p.biases:
            # keep pre-activations off the exact ReLU kink: with zero biases
            # a fully dropped-out row lands on a = 0, where the one-sided
            # analytic subgradient and a central difference legitimately differ
            b += jitter.normal(scale=0.3, size=b.shape)
        x = np.random.default_rng(9).normal(size=(mb, sizes[0]))
        proj = np.random.default_rng(10).normal(size=(mb, sizes[-1]))

        def run():
            # frozen dropout: identical rng stream on every evaluation
            y, tape = forward(x, p, mode="train",
                              rng=np.random.default_rng(42), update_running=False)
            return y, tape

        y, tape = run()
        grads, dx = backward(tape, proj, p)

        def loss():
            return float((run()[0] * proj).sum())

        for name, arr in p.param_groups().items():
            fd = finite_difference_grad(loss, arr)
            err = relative_error(grads[name], fd)
            assert err <= 1e-4, f"{name}: relative error {err:.2e}"
        fd_x = finite_difference_grad(loss, x)
        assert relative_error(dx, fd_x) <= 1e-4

    def test_gradients_no_dropout(self):
        self._fd_check(dropout_p=0.0)

    def test_gradients_with_frozen_dropout(self):
        self._fd_check(dropout_p=0.4)

    def test_gradients_three_hidden_layers(self):
        self._fd_check(dropout_p=0.25, sizes=(10, 9, 7, 4), mb=5)

    def test_final_bias_is_absorbed_by_batch_norm(self):
        # mean subtraction cancels the last affine's bias exactly, so its
        # gradient is zero and the parameter never moves from init
        p = small_params()
        x = np.random.default_rng(12).normal(size=(6, 12))
        y, tape = forward(x, p, mode="train")
        grads, _ = backward(tape, np.random.default_rng(13).normal(size=y.shape), p)
        assert np.abs(grads["b1"]).max() < 1e-12

    def test_requires_train_tape(self):
        p = small_params()
        y, tape = forward(np.zeros((3, 12)), p, mode="infer")
        with pytest.raises(ValueError):
            backward(tape, np.zeros_like(y), p)


class TestRepresent:
    SPEC = ProjectionSpec(seed=2, num_projections=3, bits_per_projection=4)

    def test_deterministic_and_oov(self):
        p = small_params()
        a = represent("wwoamn", p, self.SPEC)
        b = represent("wwoamn", p, self.SPEC)
        assert np.array_equal(a, b)
        assert a.shape == (5,)

    def test_matches_batched_forward(self):
        from npsg.projector import word_input
        p = small_params()
        words = make_cluster_words(np.random.default_rng(11), 100)
        batch = np.stack([word_input(w, self.SPEC) for w in words])
        y, _ = forward(batch, p, mode="infer")
        singles = np.stack([represent(w, p, self.SPEC) for w in words])
        assert np.abs(y - singles).max() < 1e-12

    def test_empty_word(self):
        with pytest.raises(ValueError):
            represent("", small_params(), self.SPEC)


class TestContextScore:
    def test_orthogonal_and_scaled(self):
        table = np.array([[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0]])
        v = np.array([0.0, 3.0])
        assert context_score(v, 0, table) == 0.0
        u = np.array([2.0, 0.0])  # |u|^2 = 4 against its own row
        logit = context_score(u, 1, table)
        assert logit == pytest.approx(4.0)
        assert 1.0 / (1.0 + np.exp(-logit)) == pytest.approx(0.9820, abs=5e-5)
        assert context_score(u, 2, table) == pytest.approx(-2.0)

    def test_bounds(self):
        table = np.zeros((3, 2))
        with pytest.raises(IndexError):
            context_score(np.zeros(2), 3, table)
        with pytest.raises(IndexError):
            context_score(np.zeros(2), -1, table)
