"""Fourier feature construction, scaling, gradients and rate scaling."""

import math

import numpy as np
import pytest

from ebac.fourier import ClampStats, build_basis
from ebac.ph import pendulum_model


P_MAX = 8.0 * math.pi * 1.90e-4
PEND_DOMAIN = [[-math.pi, math.pi], [-P_MAX, P_MAX]]


def test_feature_counts():
    assert build_basis(3, PEND_DOMAIN).size == 16
    assert build_basis(3, [[-math.pi, math.pi]]).size == 4
    assert build_basis(0, PEND_DOMAIN).size == 1
    assert build_basis(2, [[-1, 1], [-1, 1], [-1, 1]]).size == 27


def test_column_enumeration_order():
    basis = build_basis(3, PEND_DOMAIN)
    c = basis.frequencies
    assert np.array_equal(c[:, 0], [0, 0])
    assert np.array_equal(c[:, 1], [1, 0])
    assert np.array_equal(c[:, 2], [2, 0])
    assert np.array_equal(c[:, 4], [0, 1])
    assert np.array_equal(c[:, 15], [3, 3])
    # Every combination appears exactly once.
    combos = {tuple(col) for col in c.T}
    assert len(combos) == 16


def test_build_rejects_degenerate_domain():
    with pytest.raises(ValueError):
        build_basis(3, [[0.0, 0.0]])
    with pytest.raises(ValueError):
        build_basis(-1, PEND_DOMAIN)


def test_scaling():
    basis = build_basis(3, PEND_DOMAIN)
    assert np.allclose(basis.scale([0.0, 0.0]), [0.0, 0.0])
    assert np.allclose(basis.scale([math.pi, P_MAX]), [1.0, 1.0])
    assert np.allclose(basis.scale([-math.pi / 2.0, 0.0]), [-0.5, 0.0])


def test_scaling_clamps_and_counts():
    basis = build_basis(3, PEND_DOMAIN)
    clamps = ClampStats()
    xbar = basis.scale([4.0, 0.0], clamps)
    assert xbar[0] == 1.0
    assert clamps.count == 1
    basis.scale([0.0, 0.0], clamps)
    assert clamps.count == 1


def test_eval_values():
    basis = build_basis(3, PEND_DOMAIN)
    assert np.allclose(basis.eval([0.0, 0.0]), np.ones(16))
    phi = basis.eval([1.0, 0.0])
    # Columns with first frequency 1 evaluate to cos(pi) = -1.
    for i, c in enumerate(basis.frequencies.T):
        if c[0] == 1 and c[1] == 0:
            assert phi[i] == pytest.approx(-1.0)
    phi = basis.eval([0.5, 0.5])
    idx = [i for i, c in enumerate(basis.frequencies.T) if tuple(c) == (1, 1)]
    assert phi[idx[0]] == pytest.approx(-1.0)


def test_periodicity_and_evenness():
    basis = build_basis(3, PEND_DOMAIN)
    rng = np.random.default_rng(0)
    for _ in range(100):
        xbar = rng.uniform(-1.0, 1.0, size=2)
        shifted = xbar + 2.0 * np.array([1.0, 0.0])
        assert np.allclose(basis.eval(xbar), basis.eval(shifted), atol=1e-12)
        shifted = xbar + 2.0 * np.array([0.0, 1.0])
        assert np.allclose(basis.eval(xbar), basis.eval(shifted), atol=1e-12)
        assert np.array_equal(basis.eval(xbar), basis.eval(-xbar))


def test_gradient_matches_finite_differences():
    basis = build_basis(3, PEND_DOMAIN)
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(100):
        xbar = rng.uniform(-0.9, 0.9, size=2)
        jac = basis.eval_gradient(xbar)
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fd = (basis.eval(xbar + e) - basis.eval(xbar - e)) / (2.0 * h)
            scale = np.maximum(np.abs(fd), 1.0)
            assert np.max(np.abs(jac[:, j] - fd) / scale) < 1e-6


def test_gradient_special_points():
    basis = build_basis(3, PEND_DOMAIN)
    assert np.array_equal(basis.eval_gradient([0.0, 0.0]), np.zeros((16, 2)))
    rng = np.random.default_rng(2)
    for _ in range(20):
        xbar = rng.uniform(-1.0, 1.0, size=2)
        assert np.array_equal(basis.eval_gradient(xbar)[0], [0.0, 0.0])


def test_raw_gradient_chain_rule():
    model = pendulum_model()
    basis = build_basis(3, model.domain)
    rng = np.random.default_rng(3)
    h = 1e-7
    for _ in range(20):
        x = np.array([rng.uniform(-3.0, 3.0), rng.uniform(-0.9, 0.9) * model.p_max])
        jac = basis.gradient(x)
        for j, hj in enumerate([h, h * model.p_max]):
            e = np.zeros(2)
            e[j] = hj
            fd = (basis.features(x + e) - basis.features(x - e)) / (2.0 * hj)
            assert np.max(np.abs(jac[:, j] - fd)) < 1e-5 * max(1.0, np.max(np.abs(fd)))


def test_learning_rates():
    basis = build_basis(3, PEND_DOMAIN)
    rates = basis.learning_rates(0.2)
    assert rates[0] == pytest.approx(0.2)
    by_freq = {tuple(c): r for c, r in zip(basis.frequencies.T, rates)}
    assert by_freq[(1.0, 0.0)] == pytest.approx(0.2)
    assert by_freq[(3.0, 0.0)] == pytest.approx(0.2 / 3.0)
    assert by_freq[(3.0, 3.0)] == pytest.approx(0.2 / math.hypot(3.0, 3.0))
    one_d = build_basis(3, [[-math.pi, math.pi]])
    assert one_d.learning_rates(0.05)[1] == pytest.approx(0.05)
    with pytest.raises(ValueError):
        basis.learning_rates(0.0)


def test_learning_rate_pythagorean_case():
    # ||c||_2 = 5 for c = (3, 4).
    basis = build_basis(4, PEND_DOMAIN)
    by_freq = {tuple(c): r for c, r in zip(basis.frequencies.T, basis.learning_rates(0.2))}
    assert by_freq[(3.0, 4.0)] == pytest.approx(0.04)
