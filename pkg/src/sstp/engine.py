"""Ensemble engine: concatenation of segment steps and stochastic hop decisions
over many trajectories, with reproducible counter-based random streams.

Every random stream is derived from (master_seed, trajectory index, slot) via
a Philox counter-based generator seeded through SeedSequence spawn keys, so
results are a pure function of the run configuration and independent of how
trajectories are scheduled across workers.

Stream layout: spawn key (0, i) draws the initial bath phase point of
trajectory i, (1, i, s) the hop uniforms of its sub-trajectory slot s,
(2, i) the initial pair when pairs are sampled rather than enumerated, and
(3, k) the hop uniforms of branch sample k in `sample_branch_estimates`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .adiabatic import PAIRS, SurfacePair
from .bath import BathSpec, ModelParams, PhasePoint, discretize_bath, wigner_widths
from .hopping import SamplingScheme

__all__ = [
    "RunConfig",
    "HopEvent",
    "SubTrajectory",
    "TrajectoryResult",
    "EnsembleResult",
    "run_trajectory",
    "run_ensemble",
    "sample_branch_estimates",
]

_HOP_STAT_KEYS = ("accepted", "frustrated", "filtered", "accepted_over_threshold", "attempts")


@dataclass(frozen=True)
class RunConfig:
    """Full description of one simulation run."""

    model: ModelParams
    scheme: SamplingScheme
    n_modes: int = 200
    omega_c: float = 1.0
    omega_max: float = 3.0
    tau: float = 0.01
    t_max: float = 10.0
    n_traj: int = 1000
    master_seed: int = 12345
    record_stride: int = 10
    enumerate_pairs: bool = True
    weight_cap: float = 1e8
    truncate_flagged: bool = False

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")
        steps = self.t_max / self.tau
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps) or round(steps) < 1:
            raise ValueError("t_max/tau must be a positive integer number of steps")
        if self.record_stride < 1 or round(steps) % self.record_stride != 0:
            raise ValueError("record_stride must divide t_max/tau")
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if not self.weight_cap > 0:
            raise ValueError("weight_cap must be > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.tau))

    @property
    def n_records(self) -> int:
        return self.n_steps // self.record_stride + 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_records) * (self.record_stride * self.tau)

    def build_bath(self) -> BathSpec:
        return discretize_bath(self.model, self.n_modes, self.omega_c, self.omega_max)

    @property
    def subtraj_per_traj(self) -> int:
        return 4 if self.enumerate_pairs else 1


@dataclass(frozen=True)
class HopEvent:
    step: int
    which_index: str
    target: int
    residual: float


@dataclass
class SubTrajectory:
    """Recorded series of one stochastic branch realization."""

    pair0: SurfacePair
    initial_weight: float
    kets: np.ndarray
    bras: np.ndarray
    R: np.ndarray
    P: np.ndarray
    weights: np.ndarray  # complex weight at record times
    estimates: np.ndarray
    abs_weights: np.ndarray
    hop_log: list[HopEvent]
    stats: dict
    flagged: bool

    def pair_at(self, rec: int) -> SurfacePair:
        return SurfacePair(int(self.kets[rec]), int(self.bras[rec]))

    def point_at(self, rec: int) -> PhasePoint:
        return PhasePoint(R=self.R[rec], P=self.P[rec])


@dataclass
class TrajectoryResult:
    times: np.ndarray
    subtrajectories: list[SubTrajectory]

    @property
    def estimate(self) -> np.ndarray:
        return np.sum([s.estimates for s in self.subtrajectories], axis=0)

    @property
    def flagged(self) -> bool:
        return any(s.flagged for s in self.subtrajectories)


@dataclass
class EnsembleResult:
    """Per-trajectory observable estimates plus streamed weight diagnostics."""

    config: RunConfig
    times: np.ndarray
    estimates: np.ndarray  # (n_traj, n_records)
    flagged: np.ndarray  # (n_traj,) bool
    sum_absw: np.ndarray
    sum_absw2: np.ndarray
    max_absw: np.ndarray
    n_weight_series: int
    hop_stats: dict

    @property
    def n_flagged(self) -> int:
        return int(np.count_nonzero(self.flagged))


def _rng(seed: int, key: tuple) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def _pair_amplitudes(gamma: float, omega_t: float) -> np.ndarray:
    G = math.hypot(omega_t, gamma)
    ch = math.sqrt(0.5 * (1.0 + gamma / G))
    sh = math.sqrt(0.5 * (1.0 - gamma / G))
    return np.array([ch, sh])


def _initial_pair_weights(gamma: float, omega_t: float) -> np.ndarray:
    """Weights for pair slots in PAIRS order: <bra|up><up|ket>."""
    amp = _pair_amplitudes(gamma, omega_t)
    return np.array(
        [amp[p.bra - 1] * amp[p.ket - 1] for p in PAIRS]
    )


def _initial_point(config: RunConfig, bath: BathSpec, traj: int) -> tuple[np.ndarray, np.ndarray]:
    sigma_r, sigma_p = wigner_widths(bath, config.model.beta)
    z = _rng(config.master_seed, (0, traj)).standard_normal(2 * bath.n_modes)
    return z[: bath.n_modes] * sigma_r, z[bath.n_modes :] * sigma_p


def _traj_slots(config: RunConfig, bath: BathSpec, traj: int):
    """Initial (pair, slot, A0) tuples for one trajectory."""
    R0, P0 = _initial_point(config, bath, traj)
    gamma0 = float(bath.couplings @ R0)
    pw = _initial_pair_weights(gamma0, config.model.omega_tunnel)
    if config.enumerate_pairs:
        slots = [(PAIRS[s], s, pw[s]) for s in range(4)]
    else:
        idx = int(_rng(config.master_seed, (2, traj)).integers(4))
        slots = [(PAIRS[idx], 0, 4.0 * pw[idx])]
    return R0, P0, slots


def _scheme_consts(scheme: SamplingScheme) -> tuple[int, float, int]:
    c_energy = scheme.c_energy if scheme.variant == "energy-conserving" else np.inf
    return scheme.scheme_id, float(c_energy), scheme.jump_id


def _no_record(nb: int):
    """Zero-width recording arrays for batch calls that skip state recording."""
    return (
        False,
        np.zeros((nb, 0, 0)),
        np.zeros((nb, 0, 0)),
        np.zeros((nb, 0), dtype=np.int64),
        np.zeros((nb, 0), dtype=np.int64),
        np.zeros((nb, 0)),
        np.zeros((nb, 0)),
        np.zeros((nb, 0), dtype=np.int64),
        np.zeros((nb, 0), dtype=np.int64),
        np.zeros((nb, 0), dtype=np.int64),
        np.zeros((nb, 0)),
        np.zeros(nb, dtype=np.int64),
    )


def run_trajectory(config: RunConfig, traj_index: int) -> TrajectoryResult:
    """Propagate one trajectory with full state recording.

    Bit-for-bit reproducible from (config, traj_index); the same numbers appear
    in the corresponding rows of `run_ensemble` (shared execution path).
    """
    from . import propagator

    bath = config.build_bath()
    cw, wsw, swow, amid, bmid, yw_tau = propagator._tables(bath, config.tau)
    c = bath.couplings
    cnorm = float(np.linalg.norm(c))
    n = bath.n_modes
    n_steps = config.n_steps
    n_rec = config.n_records
    scheme_id, c_energy, jump_id = _scheme_consts(config.scheme)

    R0, P0, slots = _traj_slots(config, bath, traj_index)
    nb = len(slots)
    ket0 = np.array([pair.ket for pair, _, _ in slots], dtype=np.int64)
    bra0 = np.array([pair.bra for pair, _, _ in slots], dtype=np.int64)
    A0 = np.array([a0 for _, _, a0 in slots])
    u = np.empty((nb, n_steps, 2))
    for k, (_, slot, _) in enumerate(slots):
        u[k] = _rng(config.master_seed, (1, traj_index, slot)).random((n_steps, 2))
    est = np.zeros((nb, n_rec))
    absw = np.zeros((nb, n_rec))
    istats = np.zeros((nb, 5), dtype=np.int64)
    fstats = np.zeros((nb, 2))
    flagged = np.zeros(nb, dtype=np.bool_)
    rec_R = np.zeros((nb, n_rec, n))
    rec_P = np.zeros((nb, n_rec, n))
    rec_ket = np.zeros((nb, n_rec), dtype=np.int64)
    rec_bra = np.zeros((nb, n_rec), dtype=np.int64)
    rec_A = np.zeros((nb, n_rec))
    rec_theta = np.zeros((nb, n_rec))
    cap = 2 * n_steps
    hop_step = np.zeros((nb, cap), dtype=np.int64)
    hop_side = np.zeros((nb, cap), dtype=np.int64)
    hop_target = np.zeros((nb, cap), dtype=np.int64)
    hop_resid = np.zeros((nb, cap))
    n_hops = np.zeros(nb, dtype=np.int64)
    _kernels.run_batch(
        np.tile(R0, (nb, 1)), np.tile(P0, (nb, 1)), ket0, bra0, A0,
        config.model.omega_tunnel, c, cnorm,
        cw, wsw, swow, amid, bmid, yw_tau,
        config.tau, n_steps, config.record_stride,
        scheme_id, c_energy, jump_id, config.weight_cap,
        u, est, absw, istats, fstats, flagged,
        True, rec_R, rec_P, rec_ket, rec_bra, rec_A, rec_theta,
        hop_step, hop_side, hop_target, hop_resid, n_hops,
    )
    subs = []
    for k, (pair, _, a0) in enumerate(slots):
        log = [
            HopEvent(
                step=int(hop_step[k, h]),
                which_index="ket" if hop_side[k, h] == 0 else "bra",
                target=int(hop_target[k, h]),
                residual=float(hop_resid[k, h]),
            )
            for h in range(n_hops[k])
        ]
        stats = dict(zip(_HOP_STAT_KEYS, (int(v) for v in istats[k])))
        stats["max_accepted_residual"] = float(fstats[k, 0])
        stats["max_abs_weight"] = float(fstats[k, 1])
        subs.append(
            SubTrajectory(
                pair0=pair,
                initial_weight=float(a0),
                kets=rec_ket[k],
                bras=rec_bra[k],
                R=rec_R[k],
                P=rec_P[k],
                weights=rec_A[k] * np.exp(1j * rec_theta[k]),
                estimates=est[k],
                abs_weights=absw[k],
                hop_log=log,
                stats=stats,
                flagged=bool(flagged[k]),
            )
        )
    return TrajectoryResult(times=config.times, subtrajectories=subs)


def _chunk_trajectories(config: RunConfig) -> int:
    # keep the per-chunk uniform table near 128 MB
    spp = config.subtraj_per_traj
    budget_sub = max(8, 16_000_000 // max(1, 2 * config.n_steps))
    return max(1, budget_sub // spp)


def run_ensemble(config: RunConfig) -> EnsembleResult:
    """Propagate the full ensemble with streamed weight-moment reduction."""
    bath = config.build_bath()
    from . import propagator

    cw, wsw, swow, amid, bmid, yw_tau = propagator._tables(bath, config.tau)
    c = bath.couplings
    cnorm = float(np.linalg.norm(c))
    n = bath.n_modes
    n_steps = config.n_steps
    n_rec = config.n_records
    spp = config.subtraj_per_traj
    scheme_id, c_energy, jump_id = _scheme_consts(config.scheme)

    estimates = np.zeros((config.n_traj, n_rec))
    flagged = np.zeros(config.n_traj, dtype=bool)
    sum_absw = np.zeros(n_rec)
    sum_absw2 = np.zeros(n_rec)
    max_absw = np.zeros(n_rec)
    istats_total = np.zeros(5, dtype=np.int64)
    max_resid = 0.0

    chunk = _chunk_trajectories(config)
    for lo in range(0, config.n_traj, chunk):
        hi = min(lo + chunk, config.n_traj)
        nb = (hi - lo) * spp
        R0 = np.empty((nb, n))
        P0 = np.empty((nb, n))
        ket0 = np.empty(nb, dtype=np.int64)
        bra0 = np.empty(nb, dtype=np.int64)
        A0 = np.empty(nb)
        u = np.empty((nb, n_steps, 2))
        for t in range(lo, hi):
            Rt, Pt, slots = _traj_slots(config, bath, t)
            for k, (pair, slot, a0) in enumerate(slots):
                b = (t - lo) * spp + k
                R0[b] = Rt
                P0[b] = Pt
                ket0[b] = pair.ket
                bra0[b] = pair.bra
                A0[b] = a0
                u[b] = _rng(config.master_seed, (1, t, slot)).random((n_steps, 2))
        est = np.zeros((nb, n_rec))
        absw = np.zeros((nb, n_rec))
        istats = np.zeros((nb, 5), dtype=np.int64)
        fstats = np.zeros((nb, 2))
        fl = np.zeros(nb, dtype=np.bool_)
        _kernels.run_batch(
            R0, P0, ket0, bra0, A0,
            config.model.omega_tunnel, c, cnorm,
            cw, wsw, swow, amid, bmid, yw_tau,
            config.tau, n_steps, config.record_stride,
            scheme_id, c_energy, jump_id, config.weight_cap,
            u, est, absw, istats, fstats, fl,
            *_no_record(nb),
        )
        estimates[lo:hi] = est.reshape(hi - lo, spp, n_rec).sum(axis=1)
        flagged[lo:hi] = fl.reshape(hi - lo, spp).any(axis=1)
        sum_absw += absw.sum(axis=0)
        sum_absw2 += (absw * absw).sum(axis=0)
        np.maximum(max_absw, absw.max(axis=0), out=max_absw)
        istats_total += istats.sum(axis=0)
        max_resid = max(max_resid, float(fstats[:, 0].max()))

    hop_stats = dict(zip(_HOP_STAT_KEYS, (int(v) for v in istats_total)))
    hop_stats["max_accepted_residual"] = max_resid
    return EnsembleResult(
        config=config,
        times=config.times,
        estimates=estimates,
        flagged=flagged,
        sum_absw=sum_absw,
        sum_absw2=sum_absw2,
        max_absw=max_absw,
        n_weight_series=config.n_traj * spp,
        hop_stats=hop_stats,
    )


def sample_branch_estimates(
    x0: PhasePoint,
    pair0: SurfacePair,
    n_samples: int,
    n_steps: int,
    tau: float,
    model: ModelParams,
    bath: BathSpec,
    scheme: SamplingScheme,
    master_seed: int = 0,
) -> np.ndarray:
    """Monte Carlo estimates of the branch sum started from a fixed (X0, pair0).

    Each sample runs the same stochastic step/hop process as the ensemble
    engine with unit initial weight; the mean estimates the enumerated branch
    sum exactly (used by the oracle unbiasedness checks).
    """
    from . import propagator

    cw, wsw, swow, amid, bmid, yw_tau = propagator._tables(bath, tau)
    c = bath.couplings
    cnorm = float(np.linalg.norm(c))
    n = bath.n_modes
    scheme_id, c_energy, jump_id = _scheme_consts(scheme)

    out = np.empty(n_samples)
    chunk = max(1, 4_000_000 // max(1, 2 * n_steps))
    for lo in range(0, n_samples, chunk):
        hi = min(lo + chunk, n_samples)
        nb = hi - lo
        R0 = np.tile(x0.R, (nb, 1))
        P0 = np.tile(x0.P, (nb, 1))
        ket0 = np.full(nb, pair0.ket, dtype=np.int64)
        bra0 = np.full(nb, pair0.bra, dtype=np.int64)
        A0 = np.ones(nb)
        u = np.empty((nb, n_steps, 2))
        for k in range(lo, hi):
            u[k - lo] = _rng(master_seed, (3, k)).random((n_steps, 2))
        est = np.zeros((nb, 2))
        absw = np.zeros((nb, 2))
        istats = np.zeros((nb, 5), dtype=np.int64)
        fstats = np.zeros((nb, 2))
        fl = np.zeros(nb, dtype=np.bool_)
        _kernels.run_batch(
            R0, P0, ket0, bra0, A0,
            model.omega_tunnel, c, cnorm,
            cw, wsw, swow, amid, bmid, yw_tau,
            tau, n_steps, n_steps,
            scheme_id, c_energy, jump_id, np.inf,
            u, est, absw, istats, fstats, fl,
            *_no_record(nb),
        )
        out[lo:hi] = est[:, 1]
    return out
