"""Critical-value bounds for the contact process on Z^d, d >= 3.

All bounds are driven by the no-return probability gamma_d > 1/2:

    alpha1 = 1/gamma - 1                 (hitting-function argument)
    alpha2 = 1 / (2d (2 gamma - 1))      (binary contact path process)
    beta   = (2 - gamma) / (2 d gamma)   (weighted linear system, optimal a, b)
    lower  = 1 / (2d - 1)

beta comes from maximizing the quadratic weight form

    L(a, b) = 2(a + b - 1) - (a^2 + b^2 - 1) - 2 a b (1 - gamma)

whose positive values make 1/(2d L(a, b)) an upper bound; the maximizer is
a = b = 1/(2 - gamma) with L = gamma/(2 - gamma).  The arithmetic below is
kept transparent to Fraction inputs so the algebraic identities can be
tested exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AccuracyError, ConditionError


def _check_weights(a, b):
    if a <= 0 or b <= 0:
        raise ValueError(f"weights must be positive, got a={a}, b={b}")


def _check_gamma(gamma):
    if not 0.5 < gamma < 1:
        raise ValueError(f"gamma must lie in (1/2, 1), got {gamma}")


def L_value(a, b, gamma):
    """The weight form L(a, b); may be <= 0 (callers check positivity)."""
    _check_weights(a, b)
    _check_gamma(gamma)
    return 2 * (a + b - 1) - (a * a + b * b - 1) - 2 * a * b * (1 - gamma)


def maximize_L(gamma) -> tuple[float, float, float]:
    """Numerically maximize L over a, b > 0; returns (a, b, value)."""
    _check_gamma(gamma)
    g = float(gamma)

    def neg(p):
        return -L_value(p[0], p[1], g)

    res = optimize.minimize(neg, x0=np.array([0.6, 0.9]), method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14,
                                     "maxiter": 10000})
    if not res.success:
        raise AccuracyError(f"L maximization failed: {res.message}")
    return float(res.x[0]), float(res.x[1]), -float(res.fun)


def optimal_ab(gamma):
    """The maximizer (1/(2 - gamma), 1/(2 - gamma)) of L.

    A derivative-free optimizer must confirm the closed form to 1e-6;
    disagreement raises AccuracyError.
    """
    _check_gamma(gamma)
    star = 1 / (2 - gamma)
    a_num, b_num, _ = maximize_L(gamma)
    if abs(a_num - star) > 1e-6 or abs(b_num - star) > 1e-6:
        raise AccuracyError(
            f"optimizer found ({a_num}, {b_num}), closed form gives {float(star)}")
    return star, star


def general_upper_bound(d: int, a, b, gamma):
    """1 / (2 d L(a, b)); requires L(a, b) > 0."""
    L = L_value(a, b, gamma)
    if L <= 0:
        raise ConditionError(
            f"L({a}, {b}) = {L} <= 0: the positivity condition fails, "
            "no bound is produced for these weights")
    return 1 / (2 * d * L)


def lambda_threshold(d: int, a, b, gamma):
    """Rate above which the positive null vector exists: 1/(2 d L(a, b))."""
    return general_upper_bound(d, a, b, gamma)


def alpha1(gamma):
    _check_gamma(gamma)
    return 1 / gamma - 1


def alpha2(d: int, gamma):
    _check_gamma(gamma)
    return 1 / (2 * d * (2 * gamma - 1))


def beta(d: int, gamma):
    _check_gamma(gamma)
    return (2 - gamma) / (2 * d * gamma)


def lower_bound(d: int):
    return 1 / (2 * d - 1)


@dataclass(frozen=True)
class BoundSet:
    """All bounds for one dimension, at the gamma used to compute them."""

    d: int
    gamma: float
    alpha1: float
    alpha2: float
    beta: float
    lower: float
    optimal_a: float
    optimal_b: float


def bound_set(d: int, gamma_value) -> BoundSet:
    a_star, b_star = optimal_ab(gamma_value)
    bs = BoundSet(
        d=d,
        gamma=float(gamma_value),
        alpha1=float(alpha1(gamma_value)),
        alpha2=float(alpha2(d, gamma_value)),
        beta=float(beta(d, gamma_value)),
        lower=float(lower_bound(d)),
        optimal_a=float(a_star),
        optimal_b=float(b_star),
    )
    if not bs.lower < bs.beta < min(bs.alpha1, bs.alpha2):
        raise AssertionError(f"bound ordering violated: {bs}")
    return bs


def bound_table(d_min: int, d_max: int, gamma_values=None) -> list[BoundSet]:
    """BoundSet per dimension in [d_min, d_max].

    gamma_values may be a mapping d -> gamma to inject externally computed
    return probabilities; the default pulls quadrature values.
    """
    if not 3 <= d_min <= d_max:
        raise ValueError(f"need 3 <= d_min <= d_max, got [{d_min}, {d_max}]")
    from . import random_walk

    rows = []
    for d in range(d_min, d_max + 1):
        g = gamma_values[d] if gamma_values is not None else random_walk.gamma(d).value
        rows.append(bound_set(d, g))
    return rows
