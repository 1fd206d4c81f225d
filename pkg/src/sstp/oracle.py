"""Ground-truth validators: exhaustive enumeration of the short-time
branch concatenation, and the analytic uncoupled-limit solution.

The enumeration walks every hop/no-hop sequence deterministically, multiplying
exact transition matrix elements instead of dividing by sampled probabilities;
its value is the exact expectation of the stochastic engine estimator started
from the same initial condition.  It deliberately reuses the propagator and
hopping modules so that agreement with the engine validates the
importance-sampling weight algebra and nothing else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adiabatic import SurfacePair, sigma_z_adiabatic
from .bath import BathSpec, ModelParams, PhasePoint
from .hopping import ENERGY_CONSERVING, SamplingScheme, energy_weight, propose_hop
from .propagator import SegmentState, step_segment

__all__ = ["BranchSum", "enumerate_dyson", "analytic_uncoupled"]

MAX_ENUM_STEPS = 12


@dataclass(frozen=True)
class BranchSum:
    value: complex
    n_branches: int
    max_weight: float


def enumerate_dyson(
    x0: PhasePoint,
    pair0: SurfacePair,
    n_steps: int,
    tau: float,
    model: ModelParams,
    bath: BathSpec,
    scheme: SamplingScheme,
) -> BranchSum:
    """Deterministic sum over every surviving branch sequence of n_steps steps."""
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if n_steps > MAX_ENUM_STEPS:
        raise ValueError(
            f"n_steps={n_steps} refused: branch count grows as 3^n "
            f"(limit {MAX_ENUM_STEPS})"
        )
    coupled = float(np.linalg.norm(bath.couplings)) > 0.0

    total = 0.0 + 0.0j
    n_branches = 0
    max_weight = 0.0

    def leaf(state: SegmentState, amp: complex):
        nonlocal total, n_branches, max_weight
        elem = sigma_z_adiabatic(state.point.R, model, bath)[
            state.pair.ket - 1, state.pair.bra - 1
        ]
        total += amp * state.phase * elem
        n_branches += 1
        max_weight = max(max_weight, abs(amp))

    def recurse(state: SegmentState, amp: complex, depth: int):
        if depth == n_steps:
            leaf(state, amp)
            return
        stepped = step_segment(state, tau, model, bath)
        recurse(stepped, amp, depth + 1)
        if not coupled:
            return
        for side in ("ket", "bra"):
            prop = propose_hop(stepped, side, tau, model, bath, scheme.jump_rule)
            if prop.frustrated or prop.rate_x == 0.0:
                continue
            if scheme.variant == ENERGY_CONSERVING and not energy_weight(
                prop.energy_residual, scheme.c_energy
            ):
                continue
            if side == "ket":
                pair = SurfacePair(prop.target, stepped.pair.bra)
            else:
                pair = SurfacePair(stepped.pair.ket, prop.target)
            hopped = SegmentState(
                point=PhasePoint(R=stepped.point.R, P=prop.shifted_momenta),
                pair=pair,
                phase=stepped.phase,
            )
            recurse(hopped, amp * prop.matrix_element, depth + 1)

    recurse(SegmentState(point=x0, pair=pair0, phase=1.0 + 0.0j), 1.0 + 0.0j, 0)
    return BranchSum(value=total, n_branches=n_branches, max_weight=max_weight)


def analytic_uncoupled(t: float, omega_tunnel: float) -> float:
    """Exact <sigma_z(t)> from the up state at zero coupling: cos(2*Omega*t)."""
    return math.cos(2.0 * omega_tunnel * t)
