import math

import numpy as np
import pytest

from oracles import svr_dual_objective, svr_exact
from postbench.data import SplitSpec, build_dataset
from postbench.svr import (
    SupportVectorRegressor,
    check_kkt,
    rbf_gram,
    rbf_kernel,
)

# Two fixed 5-point instances with expected values frozen from the
# KKT-enumeration oracle in oracles.py (also cross-checked against an
# SLSQP solve of the smooth split-variable dual).
INSTANCE_A = dict(
    X=np.array([[0.0, 0.1], [0.2, 0.9], [0.5, 0.4], [0.7, 0.8], [1.0, 0.2]]),
    y=np.array([0.1, 0.8, 0.45, 0.9, 0.3]),
    C=2.0, epsilon=0.05, gamma=0.8,
    objective=0.31802549511,
    query=np.array([[0.15, 0.3], [0.6, 0.6], [0.9, 0.9]]),
    preds=np.array([0.308650351192, 0.68609625369, 0.89334920028]),
)
INSTANCE_B = dict(  # small box, so several coefficients sit at +-C
    X=np.array([[0.05, 0.95], [0.3, 0.3], [0.55, 0.75], [0.8, 0.1], [0.95, 0.6]]),
    y=np.array([0.95, 0.05, 0.7, 0.02, 0.6]),
    C=0.4, epsilon=0.1, gamma=1.2,
    objective=0.273995854683,
    query=np.array([[0.2, 0.8], [0.5, 0.5], [0.85, 0.3]]),
    preds=np.array([0.66353762091, 0.402716155736, 0.283525272281]),
)


def _full_beta(model, n):
    beta = np.zeros(n)
    beta[model.support_idx_] = model.dual_coef_
    return beta


@pytest.fixture(scope="module")
def trained_on_split(fixture_path):
    _, train, _ = build_dataset(fixture_path, SplitSpec(seed=1))
    y = train.target_column("shares")
    model = SupportVectorRegressor().fit(train.features, y)
    return model, train.features, y


class TestKernel:
    def test_identical_points(self):
        assert rbf_kernel([1.0, 2.0], [1.0, 2.0], 0.1) == 1.0

    def test_hand_evaluated_distance(self):
        x = np.zeros(2)
        z = np.array([math.sqrt(10.0), 0.0])
        assert rbf_kernel(x, z, 0.1) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_large_gamma_vanishes(self):
        assert rbf_kernel([0.0], [1.0], 1e6) < 1e-300

    def test_symmetry_and_unit_diagonal(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(0, 1, (8, 3))
        gram = rbf_gram(a, a, 0.7)
        np.testing.assert_array_equal(gram, gram.T)
        np.testing.assert_allclose(np.diag(gram), 1.0, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rbf_kernel([1.0, 2.0], [1.0], 0.1)
        with pytest.raises(ValueError):
            rbf_kernel([1.0], [1.0], 0.0)


class TestSmoAgainstOracle:
    @pytest.mark.parametrize("inst", [INSTANCE_A, INSTANCE_B],
                             ids=["interior", "bounded"])
    def test_frozen_instances(self, inst):
        model = SupportVectorRegressor(C=inst["C"], epsilon=inst["epsilon"],
                                       gamma=inst["gamma"], kkt_tol=1e-6)
        model.fit(inst["X"], inst["y"])
        beta = _full_beta(model, 5)
        gram = rbf_gram(inst["X"], inst["X"], inst["gamma"])
        obj = svr_dual_objective(beta, gram, inst["y"], inst["epsilon"])
        assert obj == pytest.approx(inst["objective"], abs=1e-4)
        got = model.decision_function(inst["query"])
        np.testing.assert_allclose(got, inst["preds"], atol=1e-3)

    def test_random_instances_live_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(6):
            X = rng.uniform(0, 1, (5, 2))
            y = rng.uniform(0, 1, 5)
            C = float(rng.uniform(0.5, 3.0))
            eps = float(rng.uniform(0.03, 0.2))
            gamma = float(rng.uniform(0.3, 1.5))
            gram = rbf_gram(X, X, gamma)
            beta_o, b0_o, obj_o = svr_exact(gram, y, C, eps)
            model = SupportVectorRegressor(C=C, epsilon=eps, gamma=gamma,
                                           kkt_tol=1e-6).fit(X, y)
            beta = _full_beta(model, 5)
            assert svr_dual_objective(beta, gram, y, eps) == pytest.approx(
                obj_o, abs=1e-4)
            grid = rng.uniform(0, 1, (10, 2))
            oracle_pred = rbf_gram(grid, X, gamma) @ beta_o + b0_o
            np.testing.assert_allclose(model.decision_function(grid),
                                       oracle_pred, atol=1e-3)

    def test_oracle_solution_satisfies_kkt(self):
        inst = INSTANCE_B
        gram = rbf_gram(inst["X"], inst["X"], inst["gamma"])
        beta_o, b0_o, _ = svr_exact(gram, inst["y"], inst["C"], inst["epsilon"])
        model = SupportVectorRegressor(C=inst["C"], epsilon=inst["epsilon"],
                                       gamma=inst["gamma"])
        model.n_features_in_ = 2
        model.support_idx_ = np.arange(5)
        model.support_vectors_ = inst["X"]
        model.dual_coef_ = beta_o
        model.intercept_ = b0_o
        model.n_support_ = 5
        report = check_kkt(model, inst["X"], inst["y"])
        assert report.max_violation <= 1e-6


class TestTrainedModel:
    def test_all_points_inside_tube_means_no_support_vectors(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        model = SupportVectorRegressor(epsilon=0.5).fit(X, np.array([0.4, 0.4]))
        assert model.n_support_ == 0
        assert model.intercept_ == pytest.approx(0.4, abs=1e-12)
        np.testing.assert_allclose(model.predict(np.random.rand(4, 2)), 0.4,
                                   atol=1e-12)

    def test_lone_support_vector_prediction_clipped(self):
        model = SupportVectorRegressor(gamma=0.1)
        model.n_features_in_ = 2
        model.support_idx_ = np.array([0])
        model.support_vectors_ = np.array([[0.5, 0.5]])
        model.dual_coef_ = np.array([2.0])
        model.intercept_ = 0.0
        model.n_support_ = 1
        x = np.array([[0.5, 0.5]])
        assert model.decision_function(x)[0] == pytest.approx(2.0, abs=1e-12)
        assert model.predict(x)[0] == 1.0

    def test_dual_feasibility_on_real_split(self, trained_on_split):
        model, X, y = trained_on_split
        beta = _full_beta(model, X.shape[0])
        assert model.converged_
        assert abs(beta.sum()) <= 1e-9 * model.C
        assert np.all(np.abs(beta) <= model.C + 1e-12)
        assert np.all(np.abs(model.dual_coef_) > 1e-12)

    def test_objective_monotone_across_passes(self, trained_on_split):
        model, _, _ = trained_on_split
        diffs = np.diff(model.objective_by_pass_)
        assert np.all(diffs >= -1e-9)

    def test_tube_property_for_unbounded_support_vectors(self, trained_on_split):
        model, X, y = trained_on_split
        beta = _full_beta(model, X.shape[0])
        interior = (np.abs(beta) > 1e-8) & (np.abs(beta) < model.C * (1 - 1e-8))
        resid = np.abs(model.decision_function(X) - y)[interior]
        assert resid.size > 0
        assert np.all(resid >= model.epsilon - model.kkt_tol)
        assert np.all(resid <= model.epsilon + model.kkt_tol)

    def test_converged_model_passes_kkt_check(self, trained_on_split):
        model, X, y = trained_on_split
        report = check_kkt(model, X, y)
        assert report.max_violation <= model.kkt_tol * (1 + 1e-9)
        assert report.n_violations == 0

    def test_corrupted_coefficient_is_flagged(self, trained_on_split):
        model, X, y = trained_on_split
        import copy
        bad = copy.deepcopy(model)
        bad.dual_coef_ = bad.dual_coef_.copy()
        bad.dual_coef_[0] += 0.5
        report = check_kkt(bad, X, y)
        assert report.max_violation > model.kkt_tol
        assert report.n_violations >= 1

    def test_pass_budget_exhaustion_flags_not_converged(self, fixture_path):
        _, train, _ = build_dataset(fixture_path, SplitSpec(seed=1))
        model = SupportVectorRegressor(max_passes=1).fit(
            train.features, train.target_column("shares"))
        assert not model.converged_
        assert model.max_violation_ > model.kkt_tol

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            SupportVectorRegressor().fit(np.ones((1, 2)), np.ones(1))


class TestSerialization:
    def test_round_trip(self, trained_on_split, tmp_path):
        model, X, _ = trained_on_split
        path = model.save(tmp_path / "svr.json")
        clone = SupportVectorRegressor.load(path)
        # 9 significant digits on coefficients of magnitude up to C=1000
        np.testing.assert_allclose(clone.predict(X[:20]), model.predict(X[:20]),
                                   atol=1e-5)

    def test_dump_bit_reproducible(self, fixture_path):
        _, train, _ = build_dataset(fixture_path, SplitSpec(seed=2))
        y = train.target_column("comments")
        a = SupportVectorRegressor().fit(train.features, y)
        b = SupportVectorRegressor().fit(train.features, y)
        assert a.to_json() == b.to_json()
