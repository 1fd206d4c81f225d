"""Surface-hopping dynamics for the spin-boson model with primitive and
energy-conserving transition sampling."""

__version__ = "0.1.0"

from .adiabatic import (  # noqa: F401
    AdiabaticData,
    SurfacePair,
    adiabatic_at,
    adiabatic_frequency,
    initial_pair_weight,
    sigma_z_adiabatic,
)
from .bath import (  # noqa: F401
    BathSpec,
    ModelParams,
    PhasePoint,
    discretize_bath,
    sample_wigner,
)
from .engine import (  # noqa: F401
    EnsembleResult,
    RunConfig,
    TrajectoryResult,
    run_ensemble,
    run_trajectory,
)
from .estimator import ObservableSeries, estimate  # noqa: F401
from .hopping import (  # noqa: F401
    HopProposal,
    SamplingScheme,
    energy_residual,
    energy_weight,
    hop_probability,
    propose_hop,
    weight_factor,
)
from .oracle import BranchSum, analytic_uncoupled, enumerate_dyson  # noqa: F401
from .propagator import SegmentState, segment_energy, step_segment  # noqa: F401
