"""Spin-boson bath in scaled units: Ohmic discretization and thermal Wigner sampling.

Scaled units throughout: M = 1, hbar = 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "BathSpec",
    "PhasePoint",
    "discretize_bath",
    "wigner_widths",
    "sample_wigner",
]


@dataclass(frozen=True)
class ModelParams:
    """Two-level subsystem parameters: tunnel splitting, Kondo coupling, temperature."""

    omega_tunnel: float
    kondo_xi: float
    beta: float
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.omega_tunnel > 0:
            raise ValueError(
                "omega_tunnel must be > 0; the adiabatic basis is degenerate "
                "at gamma = 0 otherwise"
            )
        if self.kondo_xi < 0:
            raise ValueError("kondo_xi must be >= 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.mass != 1.0 or self.hbar != 1.0:
            raise ValueError("scaled units: mass and hbar are fixed at 1")


@dataclass(frozen=True)
class BathSpec:
    """Discretized Ohmic bath: mode frequencies and subsystem couplings."""

    n_modes: int
    frequencies: np.ndarray
    couplings: np.ndarray
    omega_c: float
    omega_max: float

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        w = np.asarray(self.frequencies, dtype=np.float64)
        c = np.asarray(self.couplings, dtype=np.float64)
        if w.shape != (self.n_modes,) or c.shape != (self.n_modes,):
            raise ValueError("frequencies and couplings must have length n_modes")
        if np.any(w < 0):
            raise ValueError("frequencies must be nonnegative")
        if self.n_modes > 1 and np.any(np.diff(w) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(c < 0):
            raise ValueError("couplings must be nonnegative")
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "couplings", c)

    def cache_key(self) -> tuple:
        return (self.n_modes, self.frequencies.tobytes(), self.couplings.tobytes())


@dataclass(frozen=True)
class PhasePoint:
    """Bath configuration: positions and momenta, one entry per mode."""

    R: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=np.float64)
        P = np.asarray(self.P, dtype=np.float64)
        if R.shape != P.shape or R.ndim != 1:
            raise ValueError("R and P must be 1-d arrays of equal length")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "P", P)


def discretize_bath(
    params: ModelParams,
    n_modes: int,
    omega_c: float = 1.0,
    omega_max: float = 3.0,
) -> BathSpec:
    """Logarithmic discretization of the Ohmic spectral density.

    omega_j = -omega_c * ln(1 - j*omega_0/omega_c), with
    omega_0 = (omega_c/N) * (1 - exp(-omega_max/omega_c)), so that the last
    mode lands on omega_max exactly.  Couplings c_j = omega_j * sqrt(xi*omega_0).
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if not omega_c > 0:
        raise ValueError("omega_c must be > 0")
    if not omega_max > 0:
        raise ValueError("omega_max must be > 0")
    omega_0 = (omega_c / n_modes) * (1.0 - np.exp(-omega_max / omega_c))
    j = np.arange(1, n_modes + 1, dtype=np.float64)
    # the last mode lands on omega_max analytically; evaluating the log there
    # loses precision (and underflows for large omega_max/omega_c)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = -omega_c * np.log(1.0 - j * omega_0 / omega_c)
    w[-1] = omega_max
    c = w * np.sqrt(params.kondo_xi * omega_0)
    return BathSpec(
        n_modes=n_modes,
        frequencies=w,
        couplings=c,
        omega_c=float(omega_c),
        omega_max=float(omega_max),
    )


def wigner_widths(bath: BathSpec, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Standard deviations (sigma_R, sigma_P) of the thermal Wigner distribution.

    Var(R_j) = 1/(2 w_j tanh(beta w_j / 2)), Var(P_j) = w_j/(2 tanh(beta w_j / 2)).
    """
    if not beta > 0:
        raise ValueError("beta must be > 0")
    w = bath.frequencies
    t = np.tanh(beta * w / 2.0)
    sigma_r = np.sqrt(1.0 / (2.0 * w * t))
    sigma_p = np.sqrt(w / (2.0 * t))
    return sigma_r, sigma_p


def sample_wigner(bath: BathSpec, beta: float, rng: np.random.Generator) -> PhasePoint:
    """Draw one bath phase point from the uncoupled thermal Wigner distribution."""
    sigma_r, sigma_p = wigner_widths(bath, beta)
    z = rng.standard_normal(2 * bath.n_modes)
    return PhasePoint(R=z[: bath.n_modes] * sigma_r, P=z[bath.n_modes :] * sigma_p)
