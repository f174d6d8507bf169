import math

import numpy as np
import pytest

from lssvm_pso.errors import DimensionMismatchError, NumericalFailure, ValidationError
from lssvm_pso.kernels import KernelSpec
from lssvm_pso.lssvm import LssvmHyperparams, LssvmModel, fit, kkt_residual, predict

import oracles

pytestmark = pytest.mark.usefixtures("backend")


def test_zero_targets_zero_solution():
    X = np.random.default_rng(0).normal(size=(8, 2))
    m = fit(X, np.zeros(8), LssvmHyperparams(10.0, KernelSpec.rbf()))
    assert np.all(m.alphas == 0) and m.bias == 0.0
    assert m.kkt_residual == 0.0
    assert kkt_residual(m, X, np.zeros(8)) == 0.0


def test_linear_near_interpolation():
    X, y = [[0.0], [1.0], [2.0]], [0.0, 1.0, 2.0]
    hp = LssvmHyperparams(1e6, KernelSpec.linear())
    m = fit(X, y, hp)
    b_ref, a_ref = oracles.lssvm_solve("linear", X, y, 1e6)
    # the middle coefficient is ~1e-11 noise; compare relative to the largest one
    np.testing.assert_allclose(m.alphas, a_ref, rtol=0, atol=1e-9 * np.abs(a_ref).max())
    assert m.bias == pytest.approx(b_ref, rel=1e-9, abs=1e-12)
    np.testing.assert_allclose(m.predict(X), y, atol=1e-3)


def test_two_point_rbf_closed_form():
    # K = [[1, e^-1], [e^-1, 1]]; antisymmetric targets force b = 0, a = +-1 / (1 + 1/C - e^-1)
    m = fit([[0.0], [1.0]], [1.0, -1.0], LssvmHyperparams(10.0, KernelSpec.rbf(1.0)))
    a = 1.0 / (1.1 - math.exp(-1.0))
    np.testing.assert_allclose(m.alphas, [a, -a], rtol=1e-12)
    assert abs(m.bias) < 1e-14


def test_predict_bias_only_model():
    m = LssvmModel(np.zeros(3), 3.0, KernelSpec.rbf(), np.ones((3, 2)), C=1.0, kkt_residual=0.0)
    np.testing.assert_array_equal(predict(m, np.random.default_rng(1).normal(size=(5, 2))), 3.0)


def test_predict_empty_and_mismatch():
    m = fit(np.eye(3), [1.0, 2.0, 3.0], LssvmHyperparams(1.0, KernelSpec.linear()))
    assert predict(m, np.zeros((0, 3))).shape == (0,)
    with pytest.raises(DimensionMismatchError):
        predict(m, np.ones((2, 2)))


def test_residual_recompute_and_perturbation():
    rng = np.random.default_rng(2)
    X, y = rng.normal(size=(30, 3)), rng.normal(size=30)
    hp = LssvmHyperparams(50.0, KernelSpec.rbf(1.5))
    m = fit(X, y, hp)
    assert m.kkt_residual <= 1e-8
    assert abs(kkt_residual(m, X, y, hp) - m.kkt_residual) <= 1e-12

    zero = fit(X, np.zeros(30), hp)
    bumped = LssvmModel(zero.alphas, zero.bias + 1.0, zero.kernel, zero.train_inputs, zero.C, 0.0)
    assert kkt_residual(bumped, X, np.zeros(30), hp) > 1e-3


def test_constraint_row():
    rng = np.random.default_rng(3)
    for family, spec in [("rbf", KernelSpec.rbf(0.5)), ("linear", KernelSpec.linear()), ("mlp", KernelSpec.mlp(0.2, -1))]:
        X, y = rng.normal(size=(25, 4)), rng.normal(size=25) * 5
        m = fit(X, y, LssvmHyperparams(100.0, spec))
        assert abs(m.alphas.sum()) <= 1e-8 * max(1.0, np.linalg.norm(y)), family


def test_limits():
    rng = np.random.default_rng(4)
    X = rng.uniform(0, 1, size=(20, 2))
    y = np.sin(4 * X[:, 0]) + X[:, 1]
    m = fit(X, y, LssvmHyperparams(1e8, KernelSpec.rbf(1.0)))
    assert np.max(np.abs(m.predict(X) - y)) <= 1e-4
    m = fit(X, y, LssvmHyperparams(1e-8, KernelSpec.rbf(1.0)))
    assert np.max(np.abs(m.alphas)) <= 1e-6 * np.linalg.norm(y)
    assert np.ptp(m.predict(X)) < 1e-6


def test_mlp_uses_lu_fallback_and_matches_oracle():
    rng = np.random.default_rng(5)
    X, y = rng.normal(size=(8, 2)), rng.normal(size=8)
    spec = KernelSpec.mlp(2.0, -3.0)
    m = fit(X, y, LssvmHyperparams(1e3, spec))
    assert m.solver == "lu"
    b_ref, a_ref = oracles.lssvm_solve("mlp", X.tolist(), y, 1e3, scale=2.0, bias=-3.0)
    np.testing.assert_allclose(m.alphas, a_ref, rtol=1e-9, atol=1e-9 * np.abs(a_ref).max())
    assert m.bias == pytest.approx(b_ref, rel=1e-9)


def test_determinism():
    rng = np.random.default_rng(6)
    X, y = rng.normal(size=(40, 3)), rng.normal(size=40)
    hp = LssvmHyperparams(10.0, KernelSpec.rbf(0.9))
    a, b = fit(X, y, hp), fit(X, y, hp)
    assert np.array_equal(a.alphas, b.alphas) and a.bias == b.bias


@pytest.mark.parametrize("X,y", [
    (np.ones((1, 2)), np.ones(1)),
    (np.array([[1.0], [np.nan]]), np.ones(2)),
    (np.ones((3, 2)), np.ones(2)),
])
def test_validation(X, y):
    with pytest.raises(ValidationError):
        fit(X, y, LssvmHyperparams(1.0, KernelSpec.linear()))


def test_bad_C():
    for C in (0.0, -1.0, math.inf, 1e-320):
        with pytest.raises(ValidationError):
            LssvmHyperparams(C, KernelSpec.linear())


def test_singular_system_reports_condition():
    # identical points: K = tanh(-2) * ones is indefinite, and 1/C = 1e-300 vanishes next to it,
    # so the bordered matrix is exactly rank 2 and the LU fallback must give up
    spec = KernelSpec.mlp(1.0, -2.0)
    with pytest.raises(NumericalFailure) as err:
        fit(np.zeros((4, 1)), [1.0, 2.0, 3.0, 4.0], LssvmHyperparams(1e300, spec))
    assert err.value.condition > 1e10


def test_json_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    X, y = rng.normal(size=(15, 3)), rng.normal(size=15)
    m = fit(X, y, LssvmHyperparams(20.0, KernelSpec.polynomial(2, 1.5)))
    path = tmp_path / "model.json"
    m.save(path)
    back = LssvmModel.load(path)
    Q = rng.normal(size=(10, 3))
    np.testing.assert_allclose(back.predict(Q), m.predict(Q), rtol=0, atol=1e-12)
    assert back.kernel == m.kernel and back.C == m.C
