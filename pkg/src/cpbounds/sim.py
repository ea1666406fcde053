"""Coupled event-driven simulation of the contact process and the weighted
linear system on a torus.

Both processes are driven by one stream of events: recovery marks per site
at rate 1 and directed infection arrows per ordered neighbor pair at rate
``lam``.  A recovery sets eta(x) = 0 and xi(x) = 0; an arrow y -> x sets
eta(x) = max(eta(x), eta(y)) and xi(x) = b xi(x) + a xi(y).  Because
a, b > 0, the indicator of xi(x) > 0 equals eta(x) after every event, so
the coupling is exact pathwise, not merely in distribution.

Between events every xi(x) grows by the common factor
exp(dt * (1 - 2 d lam (a + b - 1))).  Since the factor is spatially
uniform and both jump rules are homogeneous of degree one, the kernels
evolve only the jump part w and the drift is restored at readout:
xi_t(x) = w_t(x) * 2**shift * exp(g t), with ``shift`` the lossless
power-of-two renormalization count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NumericRangeError
from .lattice import DisplacementBox, TorusLattice, displacement_offset_table
from .rng import stream_state

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ModelParams:
    """Torus geometry plus the rates/weights of both processes.

    lam is the infection rate per directed edge (recovery rate is 1);
    a, b are the linear-system weights.  lam = 0 is allowed and gives the
    pure death process.
    """

    d: int
    side: int
    lam: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"infection rate must be >= 0, got {self.lam}")
        if self.a <= 0 or self.b <= 0:
            raise ValueError(f"weights a, b must be positive, got a={self.a}, b={self.b}")
        TorusLattice(self.d, self.side)  # validates d and side

    @property
    def n_sites(self) -> int:
        return self.side**self.d

    @property
    def lattice(self) -> TorusLattice:
        return TorusLattice(self.d, self.side)

    @property
    def drift_rate(self) -> float:
        """Exponent g of the between-event drift exp(g dt)."""
        return 1.0 - 2.0 * self.d * self.lam * (self.a + self.b - 1.0)

    @property
    def total_rate(self) -> float:
        return self.n_sites * (1.0 + 2.0 * self.d * self.lam)

    @property
    def recovery_fraction(self) -> float:
        return 1.0 / (1.0 + 2.0 * self.d * self.lam)


@dataclass
class FieldState:
    """Linear-system field at one instant.

    ``scaled`` is the jump part w; the physical field is
    w * 2**shift * exp(drift_log).  ``rng_cursor`` is the number of stream
    draws consumed before this snapshot.
    """

    time: float
    scaled: np.ndarray
    shift: int
    drift_log: float
    rng_cursor: int = 0

    @property
    def log_scale(self) -> float:
        return self.drift_log + self.shift * _LN2

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            out = self.scaled * np.exp(self.log_scale)
        if not np.all(np.isfinite(out)):
            raise NumericRangeError(
                "field overflow when materializing xi values; "
                "use scaled/log_scale for ratio-safe access")
        return out

    @property
    def indicator(self) -> np.ndarray:
        """Derived occupation field 1{xi > 0}."""
        return (self.scaled > 0).astype(np.uint8)


@dataclass
class CoupledRun:
    params: ModelParams
    seed: int
    times: np.ndarray
    eta: np.ndarray          # (n_snapshots, n_sites) uint8
    fields: list[FieldState]
    events: int
    draws: int


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float


def _check_seed(seed: int):
    if not (0 <= int(seed) < 2**63):
        raise ValueError(f"seed must be in [0, 2**63), got {seed}")


def _snapshot_array(times, t_end=None) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if ts.size == 0:
        raise ValueError("at least one snapshot time is required")
    if np.any(ts < 0):
        raise ValueError("snapshot times must be >= 0")
    if t_end is not None and np.any(ts > t_end):
        raise ValueError("snapshot times must not exceed t_end")
    if np.any(np.diff(ts) < 0):
        raise ValueError("snapshot times must be sorted ascending")
    return ts


def simulate_coupled(params: ModelParams, t_end: float, seed: int,
                     snapshot_times=None, _disable_jumps: bool = False) -> CoupledRun:
    """Run one coupled trajectory from the all-ones state.

    Snapshots default to [t_end].  With ``_disable_jumps`` (test hook) the
    event channels are switched off and the field is pure drift.
    """
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    _check_seed(seed)
    ts = _snapshot_array([t_end] if snapshot_times is None else snapshot_times, t_end)
    n, g = params.n_sites, params.drift_rate
    n_snaps = ts.size
    if _disable_jumps:
        eta = np.ones((n_snaps, n), np.uint8)
        fields = [FieldState(float(t), np.ones(n), 0, g * float(t), 0) for t in ts]
        return CoupledRun(params, seed, ts, eta, fields, 0, 0)
    eta = np.empty((n_snaps, n), np.uint8)
    w = np.empty((n_snaps, n), np.float64)
    k = np.zeros(n_snaps, np.int64)
    evt = np.zeros(n_snaps, np.int64)
    drw = np.zeros(n_snaps, np.int64)
    events, draws = _kernels.coupled_core(
        params.lattice.neighbor_table, params.recovery_fraction,
        params.total_rate, params.a, params.b, ts,
        np.uint64(stream_state(int(seed), 0)), eta, w, k, evt, drw)
    if not np.all(np.isfinite(w)):
        raise NumericRangeError("non-finite field values produced by event loop")
    fields = [FieldState(float(ts[i]), w[i], int(k[i]), g * float(ts[i]), int(drw[i]))
              for i in range(n_snaps)]
    return CoupledRun(params, seed, ts, eta, fields, int(events), int(draws))


def estimate_survival(params: ModelParams, times, replicas: int, seed: int):
    """Monte Carlo estimate of P(eta_t(O) = 1) from the all-ones start.

    The origin indicator is averaged over all torus sites (valid by
    translation invariance) and over ``replicas`` independent runs driven
    by per-replica streams keyed (seed, replica).  Returns one Estimate
    per requested time, or a single Estimate for scalar input.
    """
    scalar = np.isscalar(times)
    ts = _snapshot_array(times)
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    _check_seed(seed)
    dens = _kernels.survival_reps(
        params.lattice.neighbor_table, params.recovery_fraction,
        params.total_rate, ts, seed, replicas)
    out = [_reduce(dens[:, i]) for i in range(ts.size)]
    return out[0] if scalar else out


def _reduce(samples: np.ndarray) -> Estimate:
    n = samples.size
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(float(np.mean(samples)), se)


@dataclass
class MomentEstimate:
    """Site-averaged moments of the field at one time.

    ``mean`` estimates E xi_t(x) (equal to 1 for the all-ones start);
    ``second(x)`` estimates the pair correlation E[xi_t(O) xi_t(x)] for a
    displacement x in the box, averaged over torus translations.
    """

    time: float
    mean: Estimate
    box: DisplacementBox
    second_values: np.ndarray = field(repr=False)
    second_se: np.ndarray = field(repr=False)
    replicas: int = 0

    def second(self, x) -> Estimate:
        j = self.box.index(x)
        return Estimate(float(self.second_values[j]), float(self.second_se[j]))


def estimate_moments(params: ModelParams, times, box_radius: int,
                     replicas: int, seed: int):
    """First and second moments of xi_t on a displacement box.

    Raw (unrenormalized) values are reconstructed exactly from the jump
    field, so an overflow here raises instead of silently rescaling.
    """
    scalar = np.isscalar(times)
    ts = _snapshot_array(times)
    if replicas < 2:
        raise ValueError("replicas must be >= 2 for standard errors")
    if box_radius > params.side // 2 - 1:
        raise ValueError(
            f"box radius {box_radius} too large for torus side {params.side}")
    _check_seed(seed)
    box = DisplacementBox(params.d, box_radius)
    disp = list(box.displacements())
    idx = displacement_offset_table(params.lattice, disp)
    mean_raw, sec_raw, shifts = _kernels.moments_reps(
        params.lattice.neighbor_table, idx, params.recovery_fraction,
        params.total_rate, params.a, params.b, ts, seed, replicas)
    g = params.drift_rate
    drift = np.exp(g * ts)[None, :]                      # (1, S)
    mean_scaled = mean_raw * np.ldexp(1.0, shifts) * drift
    sec_scaled = sec_raw * (np.ldexp(1.0, 2 * shifts) * drift**2)[:, :, None]
    if not (np.all(np.isfinite(mean_scaled)) and np.all(np.isfinite(sec_scaled))):
        raise NumericRangeError("raw moment overflow; reduce t or weights")
    out = []
    for s, t in enumerate(ts):
        vals = sec_scaled[:, s, :]                       # (replicas, n_disp)
        out.append(MomentEstimate(
            time=float(t),
            mean=_reduce(mean_scaled[:, s]),
            box=box,
            second_values=vals.mean(axis=0),
            second_se=vals.std(axis=0, ddof=1) / math.sqrt(replicas),
            replicas=replicas))
    return out[0] if scalar else out
