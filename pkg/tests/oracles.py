"""Independent oracles used by the test suite.

Nothing here shares code paths with the package internals it checks:
the return-probability series comes from an exact log-domain convolution
of one-axis step counts, the contact-process reference is a separately
written active-list Gillespie simulator with numpy seeding and an
xorshift128+ stream, and the weight-form maximizer is a refining grid
search.
"""

import math

import numpy as np
from numba import njit, prange
from scipy.special import zeta

U64 = np.uint64


# ---------------------------------------------------------------- DP sums

def _log_axis_series(n_max: int) -> np.ndarray:
    """log of u_m / m!, where u_m = P(one-axis +-1 walk returns in m steps).

    u_m = C(m, m/2) 2^-m for even m, else 0.  These are the exponential-
    generating-function coefficients whose d-fold convolution gives the
    full walk's return probabilities.
    """
    m = np.arange(n_max + 1)
    with np.errstate(divide="ignore"):
        lh = np.where(
            m % 2 == 0,
            -2.0 * np.vectorize(math.lgamma)(m / 2 + 1) - m * math.log(2.0),
            -np.inf)
    return lh


def _log_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.size
    out = np.full(n, -np.inf)
    for k in range(n):
        terms = a[: k + 1] + b[k::-1]
        m = terms.max()
        if np.isfinite(m):
            out[k] = m + math.log(np.exp(terms - m).sum())
    return out


def dp_return_probabilities(d: int, n_max: int) -> np.ndarray:
    """P(S_n = O | S_0 = O) for n = 0..n_max, by exact-series convolution."""
    lh = _log_axis_series(n_max)
    acc = lh.copy()
    for _ in range(d - 1):
        acc = _log_conv(acc, lh)
    n = np.arange(n_max + 1)
    logp = np.vectorize(math.lgamma)(n + 1) - n * math.log(d) + acc
    return np.exp(logp)


def dp_green_zero(d: int, n_max: int = 10000) -> tuple[float, float]:
    """G(O) = sum_n P(S_n = O) with a local-limit tail estimate.

    The partial sum runs to n_max; the tail uses P(S_n = O) ~
    2 (d / 2 pi n)^{d/2} (1 + e1/n) for even n, with e1 fitted from the
    last exact term and the remainder reported as the error.
    """
    if n_max % 2 != 0:
        raise ValueError("n_max must be even")
    p = dp_return_probabilities(d, n_max)
    partial = float(p.sum())
    half = d / 2.0
    amp = 2.0 * (d / (2.0 * math.pi)) ** half
    lead_asym = amp * n_max ** (-half)
    e1 = (p[n_max] / lead_asym - 1.0) * n_max
    m_next = n_max // 2 + 1
    tail_lead = amp * 2.0**-half * float(zeta(half, m_next))
    tail_corr = amp * e1 * 2.0 ** (-half - 1.0) * float(zeta(half + 1.0, m_next))
    err = abs(tail_corr) * 0.5 + abs(e1) * amp * 2.0 ** (-half - 2.0) \
        * float(zeta(half + 2.0, m_next)) * abs(e1)
    return partial + tail_lead + tail_corr, err


def dp_gamma(d: int, n_max: int = 10000) -> tuple[float, float]:
    g0, err = dp_green_zero(d, n_max)
    return 1.0 / g0, err / g0**2


def dp_gamma_table(d_min: int, d_max: int) -> list[tuple[float, float]]:
    # larger d has a faster-vanishing tail; shorter sums suffice
    return [dp_gamma(d, 10000 if d == 3 else 2000) for d in range(d_min, d_max + 1)]


# ----------------------------------------------- independent contact process

@njit(cache=True, inline="always")
def _xs_unit(s0, s1):
    # xorshift128+
    x = s0
    y = s1
    s0 = y
    x ^= x << U64(23)
    s1 = x ^ y ^ (x >> U64(17)) ^ (y >> U64(26))
    return ((s1 + y) >> U64(11)) * (1.0 / 9007199254740992.0), s0, s1


@njit(cache=True, parallel=True)
def _contact_reference(nbr, lam, snap_times, seeds, replicas):
    """Active-list Gillespie: total rate n_occ (1 + 2 d lam), occupied sites
    recover or push infection; the no-op-free scheme has the same law as
    the constant-rate graphical representation."""
    n_sites = nbr.shape[0]
    n_dirs = nbr.shape[1]
    n_snaps = snap_times.size
    p_rec = 1.0 / (1.0 + n_dirs * lam)
    out = np.zeros((replicas, n_snaps))
    for r in prange(replicas):
        s0 = seeds[r, 0]
        s1 = seeds[r, 1]
        eta = np.ones(n_sites, np.uint8)
        occ = np.empty(n_sites, np.int64)
        pos = np.empty(n_sites, np.int64)
        for i in range(n_sites):
            occ[i] = i
            pos[i] = i
        n_occ = n_sites
        t = 0.0
        si = 0
        while si < n_snaps:
            if n_occ == 0:
                while si < n_snaps:
                    out[r, si] = 0.0
                    si += 1
                break
            u, s0, s1 = _xs_unit(s0, s1)
            t_next = t - np.log(1.0 - u) / (n_occ * (1.0 + n_dirs * lam))
            while si < n_snaps and snap_times[si] <= t_next:
                out[r, si] = n_occ / n_sites
                si += 1
            if si >= n_snaps:
                break
            t = t_next
            u, s0, s1 = _xs_unit(s0, s1)
            x = occ[int(u * n_occ)]
            u, s0, s1 = _xs_unit(s0, s1)
            if u < p_rec:
                eta[x] = 0
                n_occ -= 1
                last = occ[n_occ]
                occ[pos[x]] = last
                pos[last] = pos[x]
            else:
                u, s0, s1 = _xs_unit(s0, s1)
                y = nbr[x, int(u * n_dirs)]
                if eta[y] == 0:
                    eta[y] = 1
                    occ[n_occ] = y
                    pos[y] = n_occ
                    n_occ += 1
    return out


def contact_survival_oracle(lattice, lam, times, replicas, seed):
    """Reference survival estimates (value, se) per time."""
    ts = np.atleast_1d(np.asarray(times, dtype=np.float64))
    seeds = np.empty((replicas, 2), dtype=np.uint64)
    for r in range(replicas):
        seeds[r] = np.random.SeedSequence([seed, r]).generate_state(2, np.uint64)
    dens = _contact_reference(lattice.neighbor_table, lam, ts, seeds, replicas)
    vals = dens.mean(axis=0)
    ses = dens.std(axis=0, ddof=1) / math.sqrt(replicas)
    return [(float(v), float(s)) for v, s in zip(vals, ses)]


# ----------------------------------------------------------- grid optimizer

def grid_maximize_L(gamma: float, levels: int = 5, pts: int = 201):
    """Maximize the weight form by refining dense grid search."""

    def L(a, b):
        return 2 * (a + b - 1) - (a * a + b * b - 1) - 2 * a * b * (1 - gamma)

    lo_a, hi_a = 1e-3, 2.0
    lo_b, hi_b = 1e-3, 2.0
    best = (1.0, 1.0)
    for _ in range(levels):
        av = np.linspace(lo_a, hi_a, pts)
        bv = np.linspace(lo_b, hi_b, pts)
        vals = L(av[:, None], bv[None, :])
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        best = (float(av[i]), float(bv[j]))
        da = (hi_a - lo_a) / (pts - 1)
        db = (hi_b - lo_b) / (pts - 1)
        lo_a, hi_a = max(1e-9, best[0] - 2 * da), best[0] + 2 * da
        lo_b, hi_b = max(1e-9, best[1] - 2 * db), best[1] + 2 * db
    return best[0], best[1], float(L(best[0], best[1]))
