"""Open Lotka-Volterra system with external fluxes and coefficient noise.

The library covers five capabilities: the perturbed vector field and its
noise sampling (model), stationary-point analysis and the regime map of
the flux plane (stability), fixed-step integration of the full and
linearized systems (integrate), ensemble displacement statistics
(ensemble), closed second-moment dynamics (moments), and convergence-basin
mapping (basin).  The lvflux command exposes each capability as a
subcommand.
"""

__version__ = "0.1.0"

from .basin import BasinGrid, BasinOutcome, NotStableRegime, converges, map_basin
from .ensemble import (
    CorrelationEstimate,
    MsdSeries,
    fit_alpha,
    noise_displacement_correlation,
    run_msd,
)
from .integrate import (
    NonPhysicalState,
    SimConfig,
    Trajectory,
    integrate_deterministic,
    integrate_linearized,
    integrate_stochastic,
    noise_column,
    simulate,
    trajectory_rng,
)
from .model import (
    FluxParams,
    NoiseDistribution,
    NoiseSpec,
    NoiseTarget,
    State,
    deterministic_rhs,
    perturbed_rhs,
    sample_noise,
    sample_noise_steps,
)
from .moments import (
    MomentMatrix,
    MomentSeries,
    MomentState,
    closed_form_zero_flux,
    moment_matrix,
    solve_moments,
)
from .stability import (
    NoStationaryPoint,
    Regime,
    RegimeGrid,
    StationaryAnalysis,
    classify,
    eigenvalues,
    regime_diagram,
    steady_state,
)

__all__ = [
    "__version__",
    "BasinGrid",
    "BasinOutcome",
    "CorrelationEstimate",
    "FluxParams",
    "MomentMatrix",
    "MomentSeries",
    "MomentState",
    "MsdSeries",
    "NoStationaryPoint",
    "NoiseDistribution",
    "NoiseSpec",
    "NoiseTarget",
    "NonPhysicalState",
    "NotStableRegime",
    "Regime",
    "RegimeGrid",
    "SimConfig",
    "State",
    "StationaryAnalysis",
    "Trajectory",
    "classify",
    "closed_form_zero_flux",
    "converges",
    "deterministic_rhs",
    "eigenvalues",
    "fit_alpha",
    "integrate_deterministic",
    "integrate_linearized",
    "integrate_stochastic",
    "map_basin",
    "moment_matrix",
    "noise_column",
    "noise_displacement_correlation",
    "perturbed_rhs",
    "regime_diagram",
    "run_msd",
    "sample_noise",
    "sample_noise_steps",
    "simulate",
    "solve_moments",
    "steady_state",
    "trajectory_rng",
]
