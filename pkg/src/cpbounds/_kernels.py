"""Numba kernels: event loops and per-replica counter-based RNG streams.

The event scheme keeps the total rate constant at N * (1 + 2 d lambda):
waiting times are exponential at that rate, and each event is a recovery
mark at a uniform site (probability 1 / (1 + 2 d lambda)) or a directed
infection arrow into a uniform site from a uniform neighbor direction.
No-op events are retained, which is what makes the occupation process and
the weighted linear system exact pathwise copies on one random stream.

Between events the linear-system field carries a spatially uniform
exponential drift, so the kernels evolve only the jump part ``w`` and the
drift factor is applied globally at readout.  Power-of-two renormalization
keeps ``w`` in range without any loss (the shift count ``k`` is returned
alongside each snapshot).
"""

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0

RENORM_BITS = 256
_RENORM_HI = 2.0**256
_RENORM_DOWN = 2.0**-256


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _stream_state(seed, replica):
    z = _mix64(U64(seed) + _GOLDEN * U64(replica))
    return z + _GOLDEN * U64(replica + 1)


@njit(cache=True, inline="always")
def _next_unit(state):
    state = state + _GOLDEN
    z = _mix64(state)
    return (z >> U64(11)) * _INV53, state


@njit(cache=True)
def stream_probe(seed, replica, n):
    """First n uniform draws of a stream; cross-checked against rng.py."""
    out = np.empty(n)
    state = _stream_state(seed, replica)
    for i in range(n):
        out[i], state = _next_unit(state)
    return out


@njit(cache=True)
def coupled_core(nbr, p_rec, total_rate, a, b, snap_times, state,
                 out_eta, out_w, out_k, out_events, out_draws):
    """One coupled trajectory; snapshots written at ``snap_times``.

    Returns (events applied, draws consumed).  ``out_w`` holds the jump
    part of the field; the caller applies the global drift factor and the
    2**out_k renormalization shift.  ``out_events``/``out_draws`` record
    the stream position as of each snapshot.
    """
    n_sites = nbr.shape[0]
    n_dirs = nbr.shape[1]
    n_snaps = snap_times.size
    eta = np.ones(n_sites, np.uint8)
    w = np.ones(n_sites, np.float64)
    k = 0
    t = 0.0
    si = 0
    events = 0
    draws = 0
    while si < n_snaps:
        u, state = _next_unit(state)
        draws += 1
        t_next = t - np.log(1.0 - u) / total_rate
        while si < n_snaps and snap_times[si] <= t_next:
            out_eta[si] = eta
            out_w[si] = w
            out_k[si] = k
            out_events[si] = events
            out_draws[si] = draws - 1  # the pending waiting-time draw is not consumed yet
            si += 1
        if si >= n_snaps:
            break
        t = t_next
        u, state = _next_unit(state)
        draws += 1
        if u < p_rec:
            u, state = _next_unit(state)
            draws += 1
            x = int(u * n_sites)
            eta[x] = 0
            w[x] = 0.0
        else:
            u, state = _next_unit(state)
            draws += 1
            x = int(u * n_sites)
            u, state = _next_unit(state)
            draws += 1
            y = nbr[x, int(u * n_dirs)]
            if eta[y] > eta[x]:
                eta[x] = eta[y]
            w[x] = b * w[x] + a * w[y]
            if w[x] > _RENORM_HI:
                for i in range(n_sites):
                    w[i] *= _RENORM_DOWN
                k += RENORM_BITS
        events += 1
    return events, draws


@njit(cache=True)
def contact_core(nbr, p_rec, total_rate, snap_times, state, out_density):
    """One contact-process trajectory; records occupied density per snapshot."""
    n_sites = nbr.shape[0]
    n_dirs = nbr.shape[1]
    n_snaps = snap_times.size
    eta = np.ones(n_sites, np.uint8)
    cnt = n_sites
    t = 0.0
    si = 0
    events = 0
    while si < n_snaps:
        u, state = _next_unit(state)
        t_next = t - np.log(1.0 - u) / total_rate
        while si < n_snaps and snap_times[si] <= t_next:
            out_density[si] = cnt / n_sites
            si += 1
        if si >= n_snaps:
            break
        t = t_next
        u, state = _next_unit(state)
        if u < p_rec:
            u, state = _next_unit(state)
            x = int(u * n_sites)
            if eta[x] == 1:
                eta[x] = 0
                cnt -= 1
        else:
            u, state = _next_unit(state)
            x = int(u * n_sites)
            u, state = _next_unit(state)
            y = nbr[x, int(u * n_dirs)]
            if eta[y] == 1 and eta[x] == 0:
                eta[x] = 1
                cnt += 1
        events += 1
    return events


@njit(cache=True, parallel=True)
def survival_reps(nbr, p_rec, total_rate, snap_times, seed, replicas):
    """Occupied density at each snapshot time, one row per replica."""
    out = np.empty((replicas, snap_times.size))
    for r in prange(replicas):
        state = _stream_state(seed, r)
        contact_core(nbr, p_rec, total_rate, snap_times, state, out[r])
    return out


@njit(cache=True, parallel=True)
def moments_reps(nbr, disp_idx, p_rec, total_rate, a, b, snap_times, seed,
                 replicas):
    """Per-replica site-averaged first and second moments of the jump field.

    Returns (mean_raw, sec_raw, shifts): mean_raw[r, s] is the site average
    of w, sec_raw[r, s, j] the site average of w[u] * w[u + delta_j], and
    shifts[r, s] the renormalization shift count at that snapshot.  The
    caller multiplies by 2**shift (squared for sec) and the drift factor.
    """
    n_sites = nbr.shape[0]
    n_disp = disp_idx.shape[0]
    n_snaps = snap_times.size
    mean_raw = np.empty((replicas, n_snaps))
    sec_raw = np.empty((replicas, n_snaps, n_disp))
    shifts = np.empty((replicas, n_snaps), np.int64)
    for r in prange(replicas):
        state = _stream_state(seed, r)
        eta = np.empty((n_snaps, n_sites), np.uint8)
        w = np.empty((n_snaps, n_sites), np.float64)
        k = np.zeros(n_snaps, np.int64)
        evt = np.zeros(n_snaps, np.int64)
        drw = np.zeros(n_snaps, np.int64)
        coupled_core(nbr, p_rec, total_rate, a, b, snap_times, state, eta, w, k,
                     evt, drw)
        for s in range(n_snaps):
            acc = 0.0
            for u in range(n_sites):
                acc += w[s, u]
            mean_raw[r, s] = acc / n_sites
            shifts[r, s] = k[s]
            for j in range(n_disp):
                acc = 0.0
                for u in range(n_sites):
                    acc += w[s, u] * w[s, disp_idx[j, u]]
                sec_raw[r, s, j] = acc / n_sites
    return mean_raw, sec_raw, shifts


@njit(cache=True, parallel=True)
def no_return_reps(d, max_steps, seed, replicas):
    """Indicator per replica that the simple walk avoids O for max_steps steps."""
    out = np.empty(replicas, np.uint8)
    n_dirs = 2 * d
    for r in prange(replicas):
        state = _stream_state(seed, r)
        pos = np.zeros(d, np.int64)
        l1 = 0
        res = np.uint8(1)
        for step in range(1, max_steps + 1):
            u, state = _next_unit(state)
            j = int(u * n_dirs)
            axis = j >> 1
            c_old = pos[axis]
            c_new = c_old + (1 if (j & 1) == 0 else -1)
            pos[axis] = c_new
            l1 += abs(c_new) - abs(c_old)
            if l1 == 0:
                res = np.uint8(0)
                break
            if l1 > max_steps - step:
                break  # cannot reach O in the remaining steps
        out[r] = res
    return out
