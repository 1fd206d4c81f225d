"""Closed-form adiabatic quantities of the two-level subsystem at fixed bath configuration.

The subsystem Hamiltonian at configuration R is
    h(R) = -Omega sigma_x - gamma(R) sigma_z,    gamma(R) = sum_j c_j R_j,
with eigenvalues -G and +G, G = sqrt(Omega^2 + gamma^2).  Adiabatic energies
include the bath potential V_b = sum_j w_j^2 R_j^2 / 2.

Phase convention: both eigenvectors carry a strictly positive first component
(possible for Omega > 0), which makes the coupling vector
d_12 = -c * Omega / (2 G^2) single-valued and real everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, ModelParams

__all__ = [
    "SurfacePair",
    "AdiabaticData",
    "PAIRS",
    "adiabatic_at",
    "adiabatic_frequency",
    "adiabatic_states",
    "sigma_z_adiabatic",
    "initial_pair_weight",
]


@dataclass(frozen=True)
class SurfacePair:
    """Ordered pair of adiabatic indices (ket, bra) labeling an observable element."""

    ket: int
    bra: int

    def __post_init__(self):
        if self.ket not in (1, 2) or self.bra not in (1, 2):
            raise ValueError("surface indices must be 1 or 2")

    @property
    def diagonal(self) -> bool:
        return self.ket == self.bra

    def swapped(self) -> "SurfacePair":
        return SurfacePair(self.bra, self.ket)


PAIRS = (SurfacePair(1, 1), SurfacePair(1, 2), SurfacePair(2, 1), SurfacePair(2, 2))


@dataclass(frozen=True)
class AdiabaticData:
    """Eigenvalues, Hellmann-Feynman forces and coupling vector at one configuration."""

    e_low: float
    e_high: float
    force_low: np.ndarray
    force_high: np.ndarray
    coupling: np.ndarray
    gap_half: float

    def energy(self, index: int) -> float:
        return self.e_low if index == 1 else self.e_high

    def force(self, index: int) -> np.ndarray:
        return self.force_low if index == 1 else self.force_high


def _gamma_g(R: np.ndarray, model: ModelParams, bath: BathSpec) -> tuple[float, float]:
    g = float(bath.couplings @ R)
    return g, float(np.hypot(model.omega_tunnel, g))


def adiabatic_at(R: np.ndarray, model: ModelParams, bath: BathSpec) -> AdiabaticData:
    """All adiabatic quantities at configuration R, in closed form."""
    R = np.asarray(R, dtype=np.float64)
    w = bath.frequencies
    c = bath.couplings
    g, G = _gamma_g(R, model, bath)
    vb = 0.5 * float(np.sum(w * w * R * R))
    harmonic = -(w * w) * R
    pull = c * (g / G)
    return AdiabaticData(
        e_low=vb - G,
        e_high=vb + G,
        force_low=harmonic + pull,
        force_high=harmonic - pull,
        coupling=-c * (model.omega_tunnel / (2.0 * G * G)),
        gap_half=G,
    )


def adiabatic_frequency(data: AdiabaticData, pair: SurfacePair) -> float:
    """Quantum adiabatic frequency (E_ket - E_bra)/hbar; zero on diagonal pairs."""
    return data.energy(pair.ket) - data.energy(pair.bra)


def adiabatic_states(R: np.ndarray, model: ModelParams, bath: BathSpec) -> np.ndarray:
    """Eigenvector matrix with columns |1;R>, |2;R> in the (up, down) basis."""
    g, G = _gamma_g(np.asarray(R, dtype=np.float64), model, bath)
    # half-angle of phi = atan2(Omega, gamma); both components positive
    ch = np.sqrt(0.5 * (1.0 + g / G))
    sh = np.sqrt(0.5 * (1.0 - g / G))
    return np.array([[ch, sh], [sh, -ch]])


def sigma_z_adiabatic(R: np.ndarray, model: ModelParams, bath: BathSpec) -> np.ndarray:
    """Matrix elements <alpha;R| sigma_z |alpha';R>; traceless, symmetric, eigenvalues +-1."""
    g, G = _gamma_g(np.asarray(R, dtype=np.float64), model, bath)
    d = g / G
    o = model.omega_tunnel / G
    return np.array([[d, o], [o, -d]])


def initial_pair_weight(
    R: np.ndarray, pair: SurfacePair, model: ModelParams, bath: BathSpec
) -> float:
    """Adiabatic matrix element <bra;R| up >< up |ket;R> of the initial density."""
    g, G = _gamma_g(np.asarray(R, dtype=np.float64), model, bath)
    amp = {
        1: np.sqrt(0.5 * (1.0 + g / G)),
        2: np.sqrt(0.5 * (1.0 - g / G)),
    }
    return float(amp[pair.bra] * amp[pair.ket])
