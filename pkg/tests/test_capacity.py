import math

import numpy as np
import pytest

from mixpredict.capacity import (
    blahut_arimoto,
    build_rho_capacity,
    capacity_growth_series,
    kl_bits,
    minimax_oracle,
    truncate_class,
)
from mixpredict.measures import (
    Bernoulli,
    BudgetError,
    check_consistency,
)
from mixpredict.nml import FiniteClass, FullBernoulliClass, bernoulli_grid


def test_two_point_masses_capacity_one_bit():
    res = blahut_arimoto([[1.0, 0.0], [0.0, 1.0]])
    assert res.converged
    assert res.capacity == pytest.approx(1.0, abs=1e-9)
    assert res.prior == pytest.approx([0.5, 0.5], abs=1e-6)


def test_identical_members_zero_capacity():
    res = blahut_arimoto([[0.3, 0.7], [0.3, 0.7]])
    assert res.capacity == pytest.approx(0.0, abs=1e-12)


def test_binary_symmetric_channel_closed_form():
    eps = 0.11
    members = [[1 - eps, eps], [eps, 1 - eps]]
    expected = 1.0 + eps * math.log2(eps) + (1 - eps) * math.log2(1 - eps)
    res = blahut_arimoto(members, tol=1e-10)
    assert res.capacity == pytest.approx(expected, abs=1e-8)


def test_bracket_is_certified():
    members = np.random.default_rng(0).dirichlet(np.ones(5), size=4)
    res = blahut_arimoto(members, tol=1e-8)
    bary = res.prior @ members
    divs = np.array([kl_bits(m, bary) for m in members])
    assert divs.max() >= res.capacity - 1e-12
    assert res.prior @ divs <= res.capacity + 1e-12
    assert res.gap < 1e-8


def test_minimax_oracle_agrees_with_iteration():
    rng = np.random.default_rng(42)
    for _ in range(5):
        members = rng.dirichlet(np.ones(6), size=3)
        ba = blahut_arimoto(members, tol=1e-10)
        mm = minimax_oracle(members)
        assert mm.value == pytest.approx(ba.capacity, abs=1e-6)


def test_minimax_oracle_budget():
    rng = np.random.default_rng(1)
    with pytest.raises(BudgetError):
        minimax_oracle(rng.dirichlet(np.ones(32), size=2))


def test_validation_rejects_bad_members():
    with pytest.raises(ValueError):
        blahut_arimoto([[0.5, 0.6]])
    with pytest.raises(ValueError):
        blahut_arimoto([[0.5, -0.1, 0.6]])
    with pytest.raises(ValueError):
        blahut_arimoto(np.zeros((0, 2)))


def test_truncate_class_routes():
    grid = truncate_class(None, 2, grid=[0.0, 0.5, 1.0])
    assert grid.shape == (3, 4)
    fin = truncate_class(bernoulli_grid([0.2, 0.8]), 3)
    assert fin.shape == (2, 8)
    lst = truncate_class([Bernoulli(0.4)], 1)
    assert np.allclose(lst, [[0.4, 0.6]])
    with pytest.raises(ValueError):
        truncate_class(FullBernoulliClass(), 2)
    with pytest.raises(ValueError):
        truncate_class([], 2)


def test_rho_capacity_predictor_consistent():
    members = [Bernoulli(p) for p in (0.1, 0.5, 0.9)]
    rho, results = build_rho_capacity(members, 4)
    assert len(results) == 4
    assert check_consistency(rho, 5).ok
    assert rho.weights.sum() == pytest.approx(1.0, abs=1e-12)
    # the predictor keeps at least the weighted barycenter mass per horizon
    for n, res in enumerate(results, start=1):
        table = rho.prob_table(n)
        level = np.asarray(res.barycenter)
        assert np.all(table >= (6.0 / math.pi ** 2) / n ** 2 * level - 1e-15)


def test_capacity_series_monotone_in_n():
    members = [Bernoulli(p) for p in np.linspace(0, 1, 5)]
    series = capacity_growth_series(members, (1, 2, 4))
    caps = [r.capacity for _, r in series]
    assert caps[0] < caps[1] < caps[2]
