"""Multiclass trainers: binary reduction, toy accuracy, prediction, ball loss."""

import math

import numpy as np
import pytest

from gaussrobust.data import Dataset, gen_gaussian_toy
from gaussrobust.linear import TrainConfig, train_guru
from gaussrobust.multiclass import (
    multiclass_asvc_loss,
    multiclass_objective,
    multiclass_predict,
    multiclass_predict_batch,
    train_m_guru,
    train_m_guru_s2,
)
from gaussrobust.robust import MulticlassModel, asvc_robust_hinge
from gaussrobust.scalars import gauss_cdf, gauss_pdf
from gaussrobust.robust import SCALE_FLOOR


@pytest.fixture(scope="module")
def three_gauss():
    return gen_gaussian_toy("three_gauss", 200, seed=4)


class TestTrainMGuru:
    def test_three_gauss_accuracy(self, three_gauss):
        train, _cv, test = three_gauss
        cfg = TrainConfig(eta0=0.5, epsilon=1e-5, max_iters=20_000, seed=0, eval_period=2000)
        model = train_m_guru(train, 0.5, cfg).final_model
        acc = float(np.mean(multiclass_predict_batch(model, test.X) == test.y))
        assert acc >= 0.95

    def test_determinism(self, three_gauss):
        train, _cv, _test = three_gauss
        cfg = TrainConfig(eta0=0.5, epsilon=1e-5, max_iters=4000, seed=2, eval_period=400)
        a = train_m_guru(train, 0.5, cfg)
        b = train_m_guru(train, 0.5, cfg)
        np.testing.assert_array_equal(a.final_model.weights, b.final_model.weights)
        assert a.objective_trace == b.objective_trace

    def test_two_class_matches_binary_predictions(self):
        # With labels {1, 2} mapped to {+1, -1}, the difference vector
        # w1 - w2 follows the primal trajectory at half the learning rate
        # (each sampled point moves both vectors by the same gradient).
        train, _cv, _test = gen_gaussian_toy("two_gauss", 150, seed=6)
        multi = Dataset(train.X, np.where(train.y == 1, 1, 2), name="as-multiclass")
        cfg_bin = TrainConfig(eta0=0.5, epsilon=1e-9, max_iters=8000, seed=3, eval_period=1000)
        cfg_mc = TrainConfig(eta0=0.25, epsilon=1e-9, max_iters=8000, seed=3, eval_period=1000)
        bin_model = train_guru(train, 0.5, cfg_bin).final_model
        mc_model = train_m_guru(multi, 0.5, cfg_mc).final_model
        grid = np.array(
            [[a, b] for a in np.linspace(-4, 4, 25) for b in np.linspace(-4, 4, 25)]
        )
        bin_pred = np.where(bin_model.decision_values(grid) >= 0.0, 1, 2)
        mc_pred = multiclass_predict_batch(mc_model, grid)
        assert float(np.mean(bin_pred == mc_pred)) >= 0.99

    def test_binary_objective_identity(self, three_gauss):
        rng = np.random.default_rng(1)
        train, _cv, _test = gen_gaussian_toy("two_gauss", 50, seed=2)
        multi_labels = np.where(train.y == 1, 1, 2)
        W = rng.standard_normal((2, 2))
        from gaussrobust.linear import robust_objective

        mc = multiclass_objective(train.X, multi_labels, W, 0.7)
        binary = robust_objective(train.X, train.y.astype(float), W[0] - W[1], 0.7)
        assert mc == pytest.approx(binary, rel=1e-15)

    def test_rejects_binary_labels(self):
        ds = Dataset(np.zeros((4, 2)), np.array([1, -1, 1, -1]))
        with pytest.raises(ValueError):
            train_m_guru(ds, 0.5, TrainConfig())


class TestTrainMGuruS2:
    def test_single_class_degenerate_rejected(self):
        ds = Dataset(np.ones((12, 2)), np.ones(12, dtype=int))
        with pytest.raises(ValueError):
            train_m_guru_s2(ds, 0.5, TrainConfig())

    def test_objective_within_five_percent_of_m_guru(self, three_gauss):
        train, _cv, _test = three_gauss
        cfg = TrainConfig(eta0=0.5, epsilon=1e-6, max_iters=20_000, seed=0, eval_period=2000)
        full = train_m_guru(train, 0.5, cfg).final_model
        s2 = train_m_guru_s2(train, 0.5, cfg).final_model
        o_full = multiclass_objective(train.X, train.y, full.weights, 0.5)
        o_s2 = multiclass_objective(train.X, train.y, s2.weights, 0.5)
        assert abs(o_s2 - o_full) / o_full < 0.05

    def test_exactly_one_vector_update_per_iteration(self, three_gauss):
        # Replay the sampling stream: applying exactly T single-vector
        # updates by hand must reproduce the trained weights.
        train, _cv, _test = three_gauss
        T = 400
        cfg = TrainConfig(eta0=0.5, epsilon=1e-15, max_iters=T, seed=8, eval_period=10_000)
        model = train_m_guru_s2(train, 0.5, cfg).final_model

        X, y, C = train.X, train.y, 3
        rng = np.random.default_rng(8)
        W = np.zeros((C, 2))

        def pair_grad(dw, x):
            margin = 1.0 - float(dw @ x)
            nw = float(np.linalg.norm(dw))
            scale = 0.5 * nw
            if scale < SCALE_FLOOR:
                step = 1.0 if margin > 0.0 else (0.0 if margin < 0.0 else 0.5)
                return -step * x
            z = margin / scale
            return (-gauss_cdf(z)) * x + (0.5 * gauss_pdf(z) / nw) * dw

        for t in range(1, T + 1):
            i = int(rng.integers(len(y)))
            eta = cfg.eta0 / math.sqrt(t)
            yi = int(y[i])
            r = int(rng.integers(C)) + 1
            if r == yi:
                g = np.zeros(2)
                for c in range(1, C + 1):
                    if c != yi:
                        g += pair_grad(W[yi - 1] - W[c - 1], X[i])
                W[yi - 1] -= eta * g
            else:
                W[r - 1] += eta * pair_grad(W[yi - 1] - W[r - 1], X[i])

        np.testing.assert_array_equal(model.weights, W)


class TestMulticlassPredict:
    def test_argmax(self):
        model = MulticlassModel(np.array([[1.0, 0.0], [0.0, 1.0]]), 1.0)
        assert multiclass_predict(model, np.array([2.0, 1.0])) == 1

    def test_tie_breaks_low(self):
        model = MulticlassModel(np.zeros((3, 2)), 1.0)
        assert multiclass_predict(model, np.array([1.0, 1.0])) == 1

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        W = rng.standard_normal((4, 3))
        x = rng.standard_normal(3)
        a = multiclass_predict(MulticlassModel(W, 1.0), x)
        b = multiclass_predict(MulticlassModel(3.7 * W, 1.0), x)
        assert a == b

    def test_dimension_mismatch(self):
        model = MulticlassModel(np.zeros((2, 2)), 1.0)
        with pytest.raises(ValueError):
            multiclass_predict(model, np.ones(3))

    def test_prediction_permutes_with_labels(self):
        rng = np.random.default_rng(5)
        W = rng.standard_normal((4, 3))
        xs = rng.standard_normal((30, 3))
        perm = np.array([3, 2, 0, 1])
        Wp = np.empty_like(W)
        for old, new in enumerate(perm):
            Wp[new] = W[old]
        base = multiclass_predict_batch(MulticlassModel(W, 1.0), xs)
        permuted = multiclass_predict_batch(MulticlassModel(Wp, 1.0), xs)
        np.testing.assert_array_equal(perm[base - 1] + 1, permuted)


class TestMulticlassBallLoss:
    def test_delta_zero_is_plain_multihinge(self):
        rng = np.random.default_rng(1)
        W = rng.standard_normal((3, 2))
        x = rng.standard_normal(2)
        model = MulticlassModel(W, 1.0)
        for y in (1, 2, 3):
            terms = [0.0] + [
                1.0 - float((W[y - 1] - W[c]) @ x) for c in range(3) if c != y - 1
            ]
            assert multiclass_asvc_loss(model, 0.0, x, y) == max(terms)

    def test_binary_reduction(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            W = rng.standard_normal((2, 3))
            x = rng.standard_normal(3)
            delta = float(rng.uniform(0.0, 2.0))
            model = MulticlassModel(W, 1.0)
            w = W[0] - W[1]
            assert multiclass_asvc_loss(model, delta, x, 1) == pytest.approx(
                asvc_robust_hinge(w, delta, x, +1), rel=1e-14, abs=1e-14
            )
            assert multiclass_asvc_loss(model, delta, x, 2) == pytest.approx(
                asvc_robust_hinge(w, delta, x, -1), rel=1e-14, abs=1e-14
            )

    def test_monotone_in_delta(self):
        rng = np.random.default_rng(3)
        W = rng.standard_normal((4, 2))
        x = rng.standard_normal(2)
        model = MulticlassModel(W, 1.0)
        deltas = np.linspace(0.0, 3.0, 13)
        for y in range(1, 5):
            vals = [multiclass_asvc_loss(model, float(d), x, y) for d in deltas]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_equal_vectors_norm_term_vanishes(self):
        W = np.tile(np.array([0.5, -0.5]), (3, 1))
        model = MulticlassModel(W, 1.0)
        # All differences are zero: every competing term is 1 regardless of delta.
        assert multiclass_asvc_loss(model, 5.0, np.array([1.0, 1.0]), 2) == 1.0

    def test_invalid_class(self):
        model = MulticlassModel(np.zeros((2, 2)), 1.0)
        with pytest.raises(ValueError):
            multiclass_asvc_loss(model, 0.1, np.ones(2), 5)
