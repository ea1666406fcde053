from fractions import Fraction

import numpy as np
import pytest
import sympy

import cpbounds as cp

import oracles


def test_L_at_unit_weights_exact():
    g = Fraction(659, 1000)
    assert cp.L_value(1, 1, g) == 2 * g - 1


def test_L_at_optimum_symbolic():
    g = sympy.Symbol("g", positive=True)
    a = 1 / (2 - g)
    L = 2 * (a + a - 1) - (a**2 + a**2 - 1) - 2 * a * a * (1 - g)
    assert sympy.simplify(L - g / (2 - g)) == 0


def test_optimum_solves_gradient_symbolically():
    a, b, g = sympy.symbols("a b g", positive=True)
    L = 2 * (a + b - 1) - (a**2 + b**2 - 1) - 2 * a * b * (1 - g)
    sol = sympy.solve([sympy.diff(L, a), sympy.diff(L, b)], [a, b], dict=True)
    assert len(sol) == 1
    assert sympy.simplify(sol[0][a] - 1 / (2 - g)) == 0
    assert sympy.simplify(sol[0][b] - 1 / (2 - g)) == 0


def test_grid_search_oracle_confirms_maximum():
    g = 0.659
    a, b, val = oracles.grid_maximize_L(g)
    assert abs(val - g / (2 - g)) < 1e-9
    assert abs(a - 1 / (2 - g)) < 1e-4 and abs(b - 1 / (2 - g)) < 1e-4
    assert round(a, 4) == 0.7457


def test_optimal_ab_paper_gamma():
    a, b = cp.optimal_ab(0.659)
    assert a == b
    assert round(a, 5) == 0.74571


def test_optimal_ab_gamma_near_one():
    a, b = cp.optimal_ab(1.0 - 1e-9)
    assert abs(a - 1.0) < 1e-8 and abs(b - 1.0) < 1e-8


def test_optimal_dominates_random_samples():
    g = 0.72
    a_star, b_star = cp.optimal_ab(g)
    best = cp.L_value(a_star, b_star, g)
    rng = np.random.default_rng(5)
    pts = rng.uniform(1e-3, 2.0, size=(10000, 2))
    vals = 2 * (pts[:, 0] + pts[:, 1] - 1) - (pts[:, 0]**2 + pts[:, 1]**2 - 1) \
        - 2 * pts[:, 0] * pts[:, 1] * (1 - g)
    assert np.all(vals <= best + 1e-12)


def test_general_upper_bound_reproduces_alpha2_at_paper_gamma():
    val = cp.general_upper_bound(3, 1, 1, 0.659)
    assert round(val, 3) == 0.524
    assert abs(val - 0.523) < 2e-3          # within the quoted gamma precision


def test_general_upper_bound_at_optimum_paper_gamma():
    g = 0.659
    a, b = cp.optimal_ab(g)
    val = cp.general_upper_bound(3, a, b, g)
    assert round(val, 4) == 0.3392
    assert val <= 0.340


def test_tiny_weights_violate_condition():
    with pytest.raises(cp.ConditionError):
        cp.general_upper_bound(3, 0.01, 0.01, 0.659)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_unit_weights_give_alpha2_exactly(d):
    g = Fraction(7, 10)
    assert cp.general_upper_bound(d, 1, 1, g) == cp.alpha2(d, g)


@pytest.mark.parametrize("d", [3, 5, 8])
def test_optimal_weights_give_beta_exactly(d):
    g = Fraction(33, 50)
    star = 1 / (2 - g)
    assert cp.general_upper_bound(d, star, star, g) == cp.beta(d, g)


def test_beta_below_alpha2_algebraically():
    g = sympy.Symbol("g", positive=True)
    assert sympy.simplify((2 - g) * (2 * g - 1) - g + 2 * (g - 1) ** 2) == 0


def test_bound_set_d3(gamma3):
    bs = cp.bound_set(3, gamma3.value)
    assert 0.515 <= bs.alpha1 <= 0.519
    assert 0.521 <= bs.alpha2 <= 0.525
    assert bs.beta <= 0.340
    assert bs.lower == 0.2


def test_bound_table_ordering_chain():
    rows = cp.bound_table(3, 10)
    for bs in rows:
        assert bs.lower < bs.beta < min(bs.alpha1, bs.alpha2)
    scaled = [2 * bs.d * bs.beta for bs in rows]
    assert all(x > y for x, y in zip(scaled, scaled[1:]))
    assert all(x > 1.0 for x in scaled)


def test_perturbation_dominance(gamma3):
    g = gamma3.value
    beta3 = cp.beta(3, g)
    rng = np.random.default_rng(11)
    count = 0
    while count < 1000:
        a, b = rng.uniform(1e-3, 2.0, size=2)
        try:
            val = cp.general_upper_bound(3, a, b, g)
        except cp.ConditionError:
            continue
        assert val >= beta3 - 1e-12
        count += 1


def test_gamma_domain_validation():
    for bad in (0.5, 1.0, 0.2, 1.7):
        with pytest.raises(ValueError):
            cp.L_value(1, 1, bad)
        with pytest.raises(ValueError):
            cp.optimal_ab(bad)
    with pytest.raises(ValueError):
        cp.L_value(0, 1, 0.7)
    with pytest.raises(ValueError):
        cp.bound_table(2, 5)
