"""Stochastic nonadiabatic transition machinery: hop proposals, the primitive
and energy-conserving transition probabilities, momentum jumps and the
importance-sampling weight bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .adiabatic import SurfacePair
from .bath import BathSpec, ModelParams
from .propagator import SegmentState

__all__ = [
    "PRIMITIVE",
    "ENERGY_CONSERVING",
    "EXACT_RESCALE",
    "FIRST_ORDER_SHIFT",
    "SamplingScheme",
    "HopProposal",
    "ZeroCouplingError",
    "propose_hop",
    "energy_residual",
    "energy_weight",
    "hop_probability",
    "weight_factor",
]

PRIMITIVE = "primitive"
ENERGY_CONSERVING = "energy-conserving"
EXACT_RESCALE = "exact-rescale"
FIRST_ORDER_SHIFT = "first-order-shift"


class ZeroCouplingError(ValueError):
    """Raised when no hop can be proposed because the coupling vector vanishes."""


@dataclass(frozen=True)
class SamplingScheme:
    """Transition-probability variant plus the momentum-jump rule."""

    variant: str = ENERGY_CONSERVING
    c_energy: float = 0.01
    jump_rule: str = FIRST_ORDER_SHIFT

    def __post_init__(self):
        if self.variant not in (PRIMITIVE, ENERGY_CONSERVING):
            raise ValueError(f"unknown scheme variant {self.variant!r}")
        if self.jump_rule not in (EXACT_RESCALE, FIRST_ORDER_SHIFT):
            raise ValueError(f"unknown jump rule {self.jump_rule!r}")
        if self.variant == ENERGY_CONSERVING and not self.c_energy > 0:
            raise ValueError("c_energy must be > 0 for the energy-conserving scheme")

    @property
    def scheme_id(self) -> int:
        return (
            _kernels.SCHEME_PRIMITIVE
            if self.variant == PRIMITIVE
            else _kernels.SCHEME_ENERGY_CONSERVING
        )

    @property
    def jump_id(self) -> int:
        return (
            _kernels.JUMP_EXACT_RESCALE
            if self.jump_rule == EXACT_RESCALE
            else _kernels.JUMP_FIRST_ORDER_SHIFT
        )


@dataclass(frozen=True)
class HopProposal:
    """One proposed single-index transition at the current configuration."""

    which_index: str  # "ket" or "bra"
    target: int
    rate_x: float
    shifted_momenta: np.ndarray | None  # None marks a frustrated proposal
    energy_residual: float
    matrix_element: float

    @property
    def frustrated(self) -> bool:
        return self.shifted_momenta is None


def propose_hop(
    state: SegmentState,
    which_index: str,
    tau: float,
    model: ModelParams,
    bath: BathSpec,
    jump_rule: str = FIRST_ORDER_SHIFT,
) -> HopProposal:
    """Propose the transition on one index side, with the momentum jump applied."""
    if not tau > 0:
        raise ValueError("tau must be > 0")
    if which_index not in ("ket", "bra"):
        raise ValueError("which_index must be 'ket' or 'bra'")
    c = bath.couplings
    cnorm = float(np.linalg.norm(c))
    if cnorm == 0.0:
        raise ZeroCouplingError("coupling vector vanishes; no transition possible")
    jump_id = (
        _kernels.JUMP_EXACT_RESCALE
        if jump_rule == EXACT_RESCALE
        else _kernels.JUMP_FIRST_ORDER_SHIFT
    )
    if jump_rule not in (EXACT_RESCALE, FIRST_ORDER_SHIFT):
        raise ValueError(f"unknown jump rule {jump_rule!r}")
    R = state.point.R
    P = state.point.P
    q = float(c @ P)
    gamma = float(c @ R)
    on_ket = which_index == "ket"
    m, x, de, frustrated, pd, pdn, resid = _kernels.propose(
        on_ket,
        state.pair.ket,
        state.pair.bra,
        q,
        gamma,
        model.omega_tunnel,
        cnorm,
        float(tau),
        jump_id,
    )
    current = state.pair.ket if on_ket else state.pair.bra
    target = 3 - current
    shifted = None if frustrated else P + (c / cnorm) * (pdn - pd)
    return HopProposal(
        which_index=which_index,
        target=target,
        rate_x=float(x),
        shifted_momenta=shifted,
        energy_residual=float(resid),
        matrix_element=float(m),
    )


def energy_residual(
    P: np.ndarray,
    P_shifted: np.ndarray,
    old_pair: SurfacePair,
    new_pair: SurfacePair,
    R: np.ndarray,
    model: ModelParams,
    bath: BathSpec,
) -> float:
    """Total-energy change across a hop, evaluated at the hop-time configuration."""
    g = float(bath.couplings @ np.asarray(R, dtype=np.float64))
    G = float(np.hypot(model.omega_tunnel, g))
    eps = {1: -G, 2: G}
    kinetic = 0.5 * (float(P_shifted @ P_shifted) - float(P @ P))
    new_mean = 0.5 * (eps[new_pair.ket] + eps[new_pair.bra])
    old_mean = 0.5 * (eps[old_pair.ket] + eps[old_pair.bra])
    return kinetic + new_mean - old_mean


def energy_weight(residual: float, c_energy: float) -> int:
    """Indicator filter: 1 inside the conservation window, 0 outside."""
    if not c_energy > 0:
        raise ValueError("c_energy must be > 0")
    return 1 if abs(residual) <= c_energy else 0


def hop_probability(proposal: HopProposal, scheme: SamplingScheme) -> float:
    """Transition probability x*w/(1 + x*w); frustrated proposals never fire."""
    if proposal.frustrated:
        return 0.0
    w = 1
    if scheme.variant == ENERGY_CONSERVING:
        w = energy_weight(proposal.energy_residual, scheme.c_energy)
    xw = proposal.rate_x * w
    return xw / (1.0 + xw)


def weight_factor(
    proposal: HopProposal, scheme: SamplingScheme, accepted: bool
) -> float:
    """Importance-sampling reweight for the realized branch of one hop test."""
    p = hop_probability(proposal, scheme)
    if accepted:
        if p == 0.0:
            raise ValueError("a proposal with zero probability cannot be accepted")
        return proposal.matrix_element / p
    return 1.0 / (1.0 - p)
