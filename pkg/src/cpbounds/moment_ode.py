"""Pair-correlation operator of the weighted linear system, its ODE, and
the explicit positive null vector.

With F_t(x) = E[xi_t(O) xi_t(x)] and the all-ones start, F solves
dF/dt = G F where G acts on fields over Z^d as

    (G F)(x) = -4 a d lam F(x) + 2 a lam sum_{y ~ x} F(y)          x != O
    (G F)(O) = [1 - 4 d lam (a+b-1) + 2 d lam (b^2-1) + 2 d lam a^2] F(O)
               + 2 a b lam sum_{y ~ O} F(y)

The origin row's neighbor weight totals 4 a b d lam; distributing it
evenly over the 2d unit displacements keeps the operator well-defined on
asymmetric fields and agrees with the symmetric reduction onto e_1.

For lam above 1/(2 d L(a, b)) the field K(x) = H(x) + c, with H the
walk's hitting function and

    c = (2 d lam L(a, b) - 1) / (1 + 2 d lam (a + b - 1)^2),

satisfies G K = 0 and inf K = c > 0.  Nonnegativity of the off-diagonal
entries then forces F_t(O) <= K(O)/inf K for all t, and Cauchy-Schwarz
turns that ceiling into the survival floor c / (1 + c).

Numerics happen on a truncated displacement box with the exterior clamped
at the initial value 1 (the far field stays near (E xi)^2 = 1; validated
by radius doubling).  Entry coefficients are plain arithmetic in
(d, lam, a, b), so tests can evaluate them over Fractions exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .bounds import L_value
from .errors import ConditionError, NumericRangeError
from .lattice import DisplacementBox
from .random_walk import GreenTable


def diag_interior_entry(d, lam, a):
    return -4 * a * lam * d


def offdiag_interior_entry(lam, a):
    return 2 * a * lam


def diag_origin_entry(d, lam, a, b):
    return 1 - 4 * d * lam * (a + b - 1) + 2 * d * lam * (b * b - 1) \
        + 2 * d * lam * a * a


def origin_neighbor_entry(lam, a, b):
    return 2 * a * b * lam


def null_shift(d, lam, a, b, gamma):
    """The constant c added to H(x) to make G (H + c) vanish."""
    L = L_value(a, b, gamma)
    return (2 * d * lam * L - 1) / (1 + 2 * d * lam * (a + b - 1) ** 2)


@dataclass(frozen=True)
class GLambdaOperator:
    """The pair-correlation operator on a radius-R displacement box.

    Neighbors outside the box read the clamped ``boundary_value``, making
    the action affine: apply(F) = A F + s with A the boxed linear part.
    """

    d: int
    lam: float
    a: float
    b: float
    radius: int
    boundary_value: float = 1.0

    def __post_init__(self):
        if self.radius < 2:
            raise ValueError(f"box radius must be >= 2, got {self.radius}")
        if self.lam <= 0 or self.a <= 0 or self.b <= 0:
            raise ValueError(
                f"lam, a, b must be positive, got {self.lam}, {self.a}, {self.b}")

    @property
    def box(self) -> DisplacementBox:
        return DisplacementBox(self.d, self.radius)

    @property
    def diag_interior(self) -> float:
        return float(diag_interior_entry(self.d, self.lam, self.a))

    @property
    def offdiag_interior(self) -> float:
        return float(offdiag_interior_entry(self.lam, self.a))

    @property
    def diag_origin(self) -> float:
        return float(diag_origin_entry(self.d, self.lam, self.a, self.b))

    @property
    def origin_neighbor(self) -> float:
        return float(origin_neighbor_entry(self.lam, self.a, self.b))

    def apply(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F, dtype=np.float64)
        if F.shape != self.box.shape:
            raise ValueError(f"field shape {F.shape} != box shape {self.box.shape}")
        nbr = self._neighbor_sum(F)
        out = self.diag_interior * F + self.offdiag_interior * nbr
        o = (self.radius,) * self.d
        out[o] = self.diag_origin * F[o] + self.origin_neighbor * nbr[o]
        return out

    def _neighbor_sum(self, F: np.ndarray) -> np.ndarray:
        padded = np.pad(F, 1, constant_values=self.boundary_value)
        core = [slice(1, -1)] * self.d
        out = np.zeros_like(F)
        for axis in range(self.d):
            lo = list(core)
            hi = list(core)
            lo[axis] = slice(0, -2)
            hi[axis] = slice(2, None)
            out += padded[tuple(lo)] + padded[tuple(hi)]
        return out

    def row_norm_bound(self) -> float:
        interior = abs(self.diag_interior) + 2 * self.d * self.offdiag_interior
        origin = abs(self.diag_origin) + 2 * self.d * self.origin_neighbor
        return max(interior, origin)

    def params_key(self) -> tuple:
        return (self.d, self.lam, self.a, self.b, self.radius)


def build_G(params, radius: int, boundary_value: float = 1.0) -> GLambdaOperator:
    """Operator from anything carrying d, lam, a, b (e.g. ModelParams)."""
    return GLambdaOperator(params.d, params.lam, params.a, params.b,
                           radius, boundary_value)


@dataclass(frozen=True)
class MomentField:
    """Pair-correlation field on the box at one time."""

    time: float
    values: np.ndarray = field(repr=False)
    boundary_value: float = 1.0

    @property
    def origin(self) -> float:
        r = (self.values.shape[0] - 1) // 2
        return float(self.values[(r,) * self.values.ndim])

    def value(self, x) -> float:
        r = (self.values.shape[0] - 1) // 2
        return float(self.values[tuple(int(c) + r for c in x)])


@dataclass(frozen=True)
class MomentTrajectory:
    times: np.ndarray
    fields: list[MomentField]
    dt: float
    error_estimate: float

    @property
    def origin_series(self) -> np.ndarray:
        return np.array([f.origin for f in self.fields])


def integrate_F(op: GLambdaOperator, times, dt: float = 0.01,
                blow_limit: float = 1e12) -> MomentTrajectory:
    """March dF/dt = G F from F_0 = 1 with classical RK4.

    The step is capped at 0.5 / row_norm_bound for stability.  The field
    is integrated twice (dt and dt/2); the reported error estimate is the
    largest discrepancy and the finer solution is returned.  Blowup beyond
    ``blow_limit`` raises instead of returning garbage.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ts = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if ts.size == 0 or np.any(ts < 0) or np.any(np.diff(ts) < 0):
        raise ValueError("times must be a nonempty ascending sequence of t >= 0")
    h_max = 0.5 / op.row_norm_bound()
    h = min(dt, h_max)
    coarse = _march(op, ts, h, blow_limit)
    fine = _march(op, ts, h / 2.0, blow_limit)
    err = max(float(np.abs(c - f).max()) for c, f in zip(coarse, fine))
    fields = [MomentField(float(t), F, op.boundary_value)
              for t, F in zip(ts, fine)]
    return MomentTrajectory(ts, fields, h / 2.0, err)


def _march(op: GLambdaOperator, ts: np.ndarray, h_target: float,
           blow_limit: float) -> list[np.ndarray]:
    F = np.ones(op.box.shape)
    out = []
    t = 0.0
    for t_next in ts:
        span = t_next - t
        if span > 0:
            n = max(1, math.ceil(span / h_target))
            h = span / n
            for _ in range(n):
                k1 = op.apply(F)
                k2 = op.apply(F + 0.5 * h * k1)
                k3 = op.apply(F + 0.5 * h * k2)
                k4 = op.apply(F + h * k3)
                F = F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(F)) or float(np.abs(F).max()) > blow_limit:
                raise NumericRangeError(
                    f"moment ODE unstable or growing without bound by t={t_next} "
                    f"(max |F| > {blow_limit:g}); the rate is likely below the "
                    "null-vector threshold")
        out.append(F.copy())
        t = t_next
    return out


def integrate_reference_expm(op: GLambdaOperator, times) -> MomentTrajectory:
    """Matrix-exponential solution on a tiny box (radius <= 2 only).

    The clamped exterior makes the flow affine, dF/dt = A F + s, solved by
    exponentiating the augmented matrix [[A, s], [0, 0]].  Used as an
    independent time-stepping oracle for integrate_F.
    """
    if op.radius > 2:
        raise ValueError("reference exponential is restricted to radius <= 2")
    ts = np.atleast_1d(np.asarray(times, dtype=np.float64))
    n = op.box.size
    shape = op.box.shape
    s = op.apply(np.zeros(shape)).ravel()
    A = np.empty((n, n))
    basis = np.zeros(n)
    for j in range(n):
        basis[j] = 1.0
        A[:, j] = op.apply(basis.reshape(shape)).ravel() - s
        basis[j] = 0.0
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = A
    M[:n, n] = s
    state0 = np.append(np.ones(n), 1.0)
    fields = []
    for t in ts:
        state = expm(M * float(t)) @ state0
        fields.append(MomentField(float(t), state[:n].reshape(shape),
                                  op.boundary_value))
    return MomentTrajectory(ts, fields, float("nan"), 0.0)


@dataclass(frozen=True)
class KVector:
    """The positive null field K = H + c on the box.

    ``c`` is the infimum of K over all of Z^d (H is positive and vanishes
    at infinity, so the infimum is not attained on any finite box).
    """

    d: int
    lam: float
    a: float
    b: float
    radius: int
    values: np.ndarray = field(repr=False)
    c: float
    h_error: float = 0.0

    @property
    def origin_value(self) -> float:
        return float(self.values[(self.radius,) * self.d])

    @property
    def inf_value(self) -> float:
        return self.c

    @property
    def box_min(self) -> float:
        return float(self.values.min())

    @property
    def survival_floor(self) -> float:
        """Asymptotic lower bound on P(eta_t(O) = 1): inf K / K(O) = c/(1+c)."""
        return self.c / (1.0 + self.c)

    @property
    def second_moment_ceiling(self) -> float:
        """Upper bound on F_t(O) for all t: K(O) / inf K = (1+c)/c."""
        return (1.0 + self.c) / self.c

    def params_key(self) -> tuple:
        return (self.d, self.lam, self.a, self.b, self.radius)


def build_K(params, green: GreenTable, radius: int) -> KVector:
    """K on the box, or ConditionError when lam is at/below the threshold."""
    if green.d != params.d:
        raise ValueError(f"table dimension {green.d} != params dimension {params.d}")
    if green.radius < radius:
        raise ValueError(
            f"hitting table radius {green.radius} < requested box radius {radius}")
    d, lam, a, b = params.d, params.lam, params.a, params.b
    gamma_val = green.gamma_value()
    L = L_value(a, b, gamma_val)
    if L <= 0:
        raise ConditionError(
            f"L({a}, {b}) = {L} <= 0 at gamma = {gamma_val}; no positive null "
            "vector exists for these weights")
    threshold = 1.0 / (2 * d * L)
    if lam <= threshold:
        raise ConditionError(
            f"lam = {lam} is at or below the null-vector threshold "
            f"1/(2 d L(a, b)) = {threshold}; inf K > 0 fails")
    c = float(null_shift(d, lam, a, b, gamma_val))
    off = green.radius - radius
    sl = tuple(slice(off, off + 2 * radius + 1) for _ in range(d))
    values = green.H[sl] + c
    return KVector(d, lam, a, b, radius, values, c, green.error)


def residual_GK(op: GLambdaOperator, kv: KVector) -> float:
    """max_x |(G K)(x)| over the interior (analytically zero).

    Interior means max-coordinate <= R - 1, so every neighbor read is a
    real table value rather than the boundary clamp.
    """
    if op.params_key() != kv.params_key():
        raise ValueError(
            f"operator {op.params_key()} and K {kv.params_key()} disagree")
    applied = op.apply(kv.values)
    interior = tuple(slice(1, -1) for _ in range(op.d))
    return float(np.abs(applied[interior]).max())


def survival_lower_bound(params, green: GreenTable, radius: int) -> float:
    """The asymptotic survival floor c / (1 + c) of the origin occupation."""
    return build_K(params, green, radius).survival_floor
