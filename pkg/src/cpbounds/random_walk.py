"""Return probability, Green function and hitting function of the simple
random walk on Z^d, d >= 3.

The Green function G(x) = sum_n P(S_n = x | S_0 = O) is computed from the
one-dimensional integral

    G(x) = int_0^inf e^{-t} prod_i I_{x_i}(t/d) dt,

which follows from embedding the walk in continuous time: the axis jump
processes are then independent Poisson thinnings, and each coordinate is a
rate-1/d walk on Z with marginal e^{-t/d} I_k(t/d).  The integrand is
evaluated in exponentially scaled form (scipy's ive), so there is no
overflow, and the algebraic ~ t^{-d/2} tail is integrated exactly by the
substitution t = 1/u^2, leaving two finite smooth quadratures with
reported error bounds.

Everything else is derived: gamma_d = 1/G(O), H(x) = G(x)/G(O).  Two
independent cross-checks are provided: a truncated Monte Carlo no-return
estimate and a discrete harmonic solve of H on a box with absorbing
boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy import sparse
from scipy.sparse.linalg import cg
from scipy.special import ive

from . import _kernels
from .errors import AccuracyError, TransienceError
from .lattice import DisplacementBox


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature settings for the Green-function integral."""

    split: float = 10.0      # boundary between the direct and tail integrals
    epsabs: float = 1e-13
    limit: int = 200
    max_error: float = 1e-8  # reported error above this raises AccuracyError


@dataclass(frozen=True)
class GammaEstimate:
    """No-return probability with an absolute error estimate.

    method is one of "quadrature", "mc", "solver".  The mc value estimates
    P(no return within max_steps) and therefore upper-bounds gamma.
    """

    d: int
    value: float
    error: float
    method: str


def _check_transient(d: int):
    if d < 3:
        raise TransienceError(
            f"d = {d}: the simple random walk on Z^{d} is recurrent; "
            "return-probability machinery requires d >= 3")


def green_function(d: int, x=None, quad: QuadConfig | None = None) -> tuple[float, float]:
    """G(x) with an error bound, by scaled-Bessel quadrature.

    x defaults to the origin.  Returns (value, error).
    """
    _check_transient(d)
    quad = quad or QuadConfig()
    if quad.split <= 0 or quad.limit < 10:
        raise AccuracyError(f"unusable quadrature settings: {quad}")
    orders = np.zeros(d, dtype=np.int64) if x is None else np.abs(
        np.asarray(x, dtype=np.int64))
    if orders.size != d:
        raise ValueError(f"displacement must have {d} coordinates")

    def f(t):
        return float(np.prod(ive(orders, t / d)))

    # limit of 2 u^{-3} f(1/u^2) as u -> 0+; nonzero only for d = 3
    tail0 = 2.0 * (d / (2.0 * math.pi)) ** 1.5 if d == 3 else 0.0

    def f_tail(u):
        if u == 0.0:
            return tail0
        return 2.0 * f(1.0 / (u * u)) / u**3

    res_bulk = integrate.quad(f, 0.0, quad.split, epsabs=quad.epsabs,
                              limit=quad.limit, full_output=True)
    res_tail = integrate.quad(f_tail, 0.0, quad.split**-0.5, epsabs=quad.epsabs,
                              limit=quad.limit, full_output=True)
    err = res_bulk[1] + res_tail[1]
    value = res_bulk[0] + res_tail[0]
    if len(res_bulk) > 3 or len(res_tail) > 3 or err > quad.max_error \
            or not np.isfinite(value):
        raise AccuracyError(
            f"Green-function quadrature for d={d}, x={tuple(map(int, orders))} "
            f"reported error {err:.3e} above {quad.max_error:.1e}")
    return value, err


def gamma(d: int, quad: QuadConfig | None = None) -> GammaEstimate:
    """gamma_d = 1 / G(O): the probability of never returning to the origin."""
    g0, err = green_function(d, None, quad)
    return GammaEstimate(d, 1.0 / g0, err / g0**2, "quadrature")


def gamma_table(d_min: int, d_max: int, quad: QuadConfig | None = None) -> list[GammaEstimate]:
    if not 3 <= d_min <= d_max:
        raise TransienceError(f"need 3 <= d_min <= d_max, got [{d_min}, {d_max}]")
    return [gamma(d, quad) for d in range(d_min, d_max + 1)]


def hitting_probability(d: int, x, quad: QuadConfig | None = None) -> float:
    """H(x) = G(x)/G(O): the probability the walk from x ever reaches O."""
    g0, _ = green_function(d, None, quad)
    gx, _ = green_function(d, x, quad)
    return gx / g0


@dataclass(frozen=True)
class GreenTable:
    """G and H = G/G(O) tabulated on a displacement box.

    ``error`` bounds the absolute error of any single H entry.  Symmetry
    under negation and coordinate permutation is exact by construction
    (each symmetry orbit is computed once).
    """

    d: int
    radius: int
    method: str
    error: float
    G: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)

    @property
    def box(self) -> DisplacementBox:
        return DisplacementBox(self.d, self.radius)

    def _cell(self, x) -> tuple[int, ...]:
        if not self.box.contains(x):
            raise ValueError(f"displacement {tuple(x)} outside radius-{self.radius} table")
        return tuple(int(c) + self.radius for c in x)

    def green(self, x) -> float:
        return float(self.G[self._cell(x)])

    def hitting(self, x) -> float:
        return float(self.H[self._cell(x)])

    def gamma_value(self) -> float:
        """gamma implied by this table, via H(e_1) = 1 - gamma."""
        e1 = (1,) + (0,) * (self.d - 1)
        return 1.0 - self.hitting(e1)


def green_table(d: int, radius: int, method: str = "quadrature",
                quad: QuadConfig | None = None, solver_radius: int = 30) -> GreenTable:
    """Tabulate G and H on the radius-R displacement box.

    method "quadrature" evaluates the Bessel integral per symmetry orbit;
    method "solver" solves the discrete harmonic equation for H on a
    larger absorbing box (bias O(R_s^{2-d}), cross-validation only).
    """
    _check_transient(d)
    box = DisplacementBox(d, radius)
    if method == "quadrature":
        cache: dict[tuple[int, ...], tuple[float, float]] = {}
        G = np.empty(box.shape)
        worst = 0.0
        for x in box.displacements():
            key = tuple(sorted((abs(c) for c in x), reverse=True))
            if key not in cache:
                cache[key] = green_function(d, key, quad)
            val, err = cache[key]
            G[tuple(c + radius for c in x)] = val
            worst = max(worst, err)
        g0 = G[(radius,) * d]
        H = G / g0
        return GreenTable(d, radius, "quadrature", 2.0 * worst / g0, G, H)
    if method == "solver":
        if solver_radius < radius + 1:
            raise ValueError("solver_radius must exceed the table radius")
        H_big, err = _solve_hitting_field(d, solver_radius)
        sl = tuple(slice(solver_radius - radius, solver_radius + radius + 1)
                   for _ in range(d))
        H = H_big[sl].copy()
        g0 = 1.0 / (1.0 - H_big[(solver_radius + 1,) + (solver_radius,) * (d - 1)])
        return GreenTable(d, radius, "solver", err, H * g0, H)
    raise ValueError(f"unknown method {method!r}")


def _solve_hitting_field(d: int, radius: int, rtol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Solve H(x) = (2d)^{-1} sum_{y~x} H(y) on a box, H(O) = 1, H = 0 outside.

    The absorbing boundary underestimates H by at most the largest true H
    on the exit shell; with H <= G and G(x) ~ c_d |x|^{2-d} that is bounded
    by c_d (R+1)^{2-d}, which is the error returned.
    """
    _check_transient(d)
    side = 2 * radius + 1
    n = side**d
    origin = (n - 1) // 2  # center of the row-major cube
    coords = np.indices((side,) * d).reshape(d, -1)
    rows, cols = [], []
    rhs = np.zeros(n)
    for axis in range(d):
        for step in (1, -1):
            shifted = coords.copy()
            shifted[axis] = shifted[axis] + step
            ok = (shifted[axis] >= 0) & (shifted[axis] < side)
            src = np.nonzero(ok)[0]
            dst = np.ravel_multi_index(tuple(shifted[:, ok]), (side,) * d)
            rows.append(src)
            cols.append(dst)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    # move the pinned origin column to the right-hand side
    hit_origin = cols == origin
    np.add.at(rhs, rows[hit_origin], 1.0 / (2 * d))
    keep = ~hit_origin & (rows != origin)
    unknown = np.ones(n, bool)
    unknown[origin] = False
    remap = np.cumsum(unknown) - 1
    adj = sparse.coo_matrix(
        (np.full(keep.sum(), -1.0 / (2 * d)), (remap[rows[keep]], remap[cols[keep]])),
        shape=(n - 1, n - 1)).tocsr()
    A = sparse.eye(n - 1, format="csr") + adj
    h, info = cg(A, rhs[unknown], rtol=rtol, atol=0.0, maxiter=20000)
    if info != 0:
        raise AccuracyError(f"harmonic solve did not converge (info={info})")
    H = np.empty(n)
    H[unknown] = h
    H[origin] = 1.0
    H = H.reshape((side,) * d)
    c_d = d * math.gamma(d / 2.0 - 1.0) / (2.0 * math.pi ** (d / 2.0))
    bias = c_d * (radius + 1) ** (2 - d)
    return H, bias + 10.0 * rtol


def gamma_solver(d: int, radius: int = 30) -> GammaEstimate:
    """gamma from the harmonic solve: 1 - H(e_1), biased upward by O(R^{2-d})."""
    H, err = _solve_hitting_field(d, radius)
    e1 = (radius + 1,) + (radius,) * (d - 1)
    return GammaEstimate(d, 1.0 - float(H[e1]), err, "solver")


def gamma_mc(d: int, max_steps: int, replicas: int, seed: int) -> GammaEstimate:
    """Monte Carlo estimate of P(no return to O within max_steps).

    Upper-bounds gamma: the truncation bias is +P(first return after
    max_steps), see mc_tail_allowance.  The reported error is the binomial
    standard error.  Replicas use independent (seed, replica) streams, so
    the estimate is independent of execution order.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if max_steps < 2 or max_steps % 2 != 0:
        raise ValueError(f"max_steps must be an even integer >= 2, got {max_steps}")
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    if not (0 <= int(seed) < 2**63):
        raise ValueError(f"seed must be in [0, 2**63), got {seed}")
    flags = _kernels.no_return_reps(d, max_steps, seed, replicas)
    p = float(np.float64(flags.sum()) / replicas)
    se = math.sqrt(max(p * (1.0 - p), 0.0) / replicas)
    return GammaEstimate(d, p, se, "mc")


def mc_tail_allowance(d: int, max_steps: int) -> float:
    """Bound on the truncation bias of gamma_mc.

    P(first return after n) <= gamma^2 sum_{m>n} P(S_m = O), and the local
    limit P(S_m = O) ~ 2 (d / 2 pi m)^{d/2} for even m gives, with
    gamma <= 1, the integral bound below.
    """
    _check_transient(d)
    return (d / (2.0 * math.pi)) ** (d / 2.0) * max_steps ** (1.0 - d / 2.0) \
        / (d / 2.0 - 1.0)


def four_step_return(d: int) -> Fraction:
    """P(S_2 = O) + P(S_4 = O, S_2 != O) as an exact rational.

    Exhaustively enumerates all (2d)^4 four-step paths and checks the
    closed form (4d^2 + 4d - 3) / (8 d^3), which strictly exceeds
    1/(2d - 1) for d >= 3.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    steps = [(axis, s) for axis in range(d) for s in (1, -1)]
    hit2 = 0
    hit4_miss2 = 0
    for path in itertools.product(steps, repeat=4):
        pos = [0] * d
        for axis, s in path[:2]:
            pos[axis] += s
        at2 = not any(pos)
        for axis, s in path[2:]:
            pos[axis] += s
        if at2:
            hit2 += 1
        elif not any(pos):
            hit4_miss2 += 1
    total = Fraction(hit2 + hit4_miss2, (2 * d) ** 4)
    closed = Fraction(4 * d * d + 4 * d - 3, 8 * d**3)
    if total != closed:
        raise AssertionError(
            f"enumeration {total} disagrees with closed form {closed} at d={d}")
    if d >= 3 and not total > Fraction(1, 2 * d - 1):
        raise AssertionError(f"expected {total} > 1/{2 * d - 1} at d={d}")
    return total


def four_step_closed_form(d: int) -> Fraction:
    return Fraction(4 * d * d + 4 * d - 3, 8 * d**3)
