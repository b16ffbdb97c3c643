"""Finite-size security bounds for discretely modulated CV QKD.

Submodules
----------
fock          truncated Fock-space states and trace distances
constellation modulation grid and preparation errors
bounds        entropies, finite-size corrections, key rates
covariance    deviation bounds and the clipped-moment oracle
sim           deterministic Monte Carlo protocol simulation
cli           command-line front end (grid | keyrate | covbounds | simulate)
"""

__version__ = "0.1.0"

from .bounds import (
    ChannelModel,
    KeyRateReport,
    SecurityParams,
    delta_aep,
    f_continuity,
    g_entropy,
    holevo_ye,
    key_length,
    mutual_info_ab,
    rate_asymptotic,
    rate_finite,
)
from .constellation import (
    ConstellationGrid,
    ConstellationSpec,
    build_grid,
    epsilon_a,
    epsilon_p_closed,
    epsilon_p_numeric,
    epsilon_tail,
)
from .covariance import (
    GaussianModulation,
    MeasurementSpec,
    clipped_moment_oracle,
    cross_deviation_bound,
    diag_deviation_bound,
    ideal_covariance,
)
from .fock import (
    DensityOperator,
    FockVector,
    ResourceError,
    TruncationPolicy,
    coherent_trace_distance,
    coherent_vector,
    thermal_state,
    trace_distance,
)
from .sim import (
    SimConfig,
    SimResult,
    empirical_epsilon_check,
    plug_in_entropy,
    run_simulation,
)

__all__ = [
    "ChannelModel", "ConstellationGrid", "ConstellationSpec", "DensityOperator",
    "FockVector", "GaussianModulation", "KeyRateReport", "MeasurementSpec",
    "ResourceError", "SecurityParams", "SimConfig", "SimResult", "TruncationPolicy",
    "build_grid", "clipped_moment_oracle", "coherent_trace_distance",
    "coherent_vector", "cross_deviation_bound", "delta_aep", "diag_deviation_bound",
    "empirical_epsilon_check", "epsilon_a", "epsilon_p_closed", "epsilon_p_numeric",
    "epsilon_tail", "f_continuity", "g_entropy", "holevo_ye", "ideal_covariance",
    "key_length", "mutual_info_ab", "plug_in_entropy", "rate_asymptotic",
    "rate_finite", "run_simulation", "thermal_state", "trace_distance",
]
