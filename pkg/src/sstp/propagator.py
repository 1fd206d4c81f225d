"""Deterministic segment evolution: classical motion on the mean surface of the
current pair plus accumulation of the quantum adiabatic phase."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .adiabatic import SurfacePair
from .bath import BathSpec, ModelParams, PhasePoint

__all__ = ["SegmentState", "step_segment", "segment_energy"]

_TABLE_CACHE: dict = {}


def _tables(bath: BathSpec, tau: float):
    key = (bath.cache_key(), float(tau))
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        tab = _kernels.step_tables(bath.frequencies, bath.couplings, float(tau))
        if len(_TABLE_CACHE) > 64:
            _TABLE_CACHE.clear()
        _TABLE_CACHE[key] = tab
    return tab


@dataclass(frozen=True)
class SegmentState:
    """Phase point, surface pair and unit-modulus adiabatic phase accumulator."""

    point: PhasePoint
    pair: SurfacePair
    phase: complex = 1.0 + 0.0j


def step_segment(
    state: SegmentState, tau: float, model: ModelParams, bath: BathSpec
) -> SegmentState:
    """Advance one step of length tau on the mean surface of the current pair."""
    if not tau > 0:
        raise ValueError("tau must be > 0")
    cw, wsw, swow, amid, bmid, yw_tau = _tables(bath, tau)
    R = state.point.R.copy()
    P = state.point.P.copy()
    theta, _ = _kernels.segment_step(
        R,
        P,
        state.pair.ket,
        state.pair.bra,
        0.0,
        model.omega_tunnel,
        bath.couplings,
        cw,
        wsw,
        swow,
        amid,
        bmid,
        yw_tau,
    )
    phase = state.phase * complex(np.cos(theta), np.sin(theta))
    if abs(abs(phase) - 1.0) > 1e-12:
        phase /= abs(phase)
    return SegmentState(point=PhasePoint(R=R, P=P), pair=state.pair, phase=phase)


def segment_energy(state: SegmentState, model: ModelParams, bath: BathSpec) -> float:
    """Kinetic energy plus the mean of the two adiabatic surfaces of the pair."""
    R = state.point.R
    P = state.point.P
    w = bath.frequencies
    g = float(bath.couplings @ R)
    G = float(np.hypot(model.omega_tunnel, g))
    vb = 0.5 * float(np.sum(w * w * R * R))
    eps = {1: -G, 2: G}
    mean_surface = vb + 0.5 * (eps[state.pair.ket] + eps[state.pair.bra])
    return 0.5 * float(P @ P) + mean_surface
