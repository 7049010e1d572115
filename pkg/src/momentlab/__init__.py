"""momentlab: dispersive moment-growth experiments with checkable reports.

A laboratory for one-dimensional Schrodinger flows (free, linear with a
potential, and defocusing NLS) that monitors weighted Sobolev norms and
spatial moments, extracts scattering states, extrapolates large-time moment
limits against their closed-form targets, and certifies nonlinear
Gronwall-type growth bounds with explicit constants.
"""

from .grid import (
    GridError,
    GridSpec,
    Spectrum,
    WaveField,
    forward_fourier,
    gaussian,
    inverse_fourier,
    l2_norm,
    make_grid,
    mass_fraction_outside,
    spectral_derivative,
    weighted_moment,
)
from .operators import (
    AssumptionReport,
    HamiltonianDecomposition,
    OperatorError,
    PositivityError,
    Potential,
    apply_hamiltonian,
    apply_sqrtH_power,
    build_hamiltonian,
    check_assumptions,
    equivalence_probe,
    norm_hs,
    norm_hsv,
    norm_sigma,
    potential_from_expression,
    random_band_limited_ensemble,
    smallest_eigenvalue,
)
from .propagation import (
    MonitorSeries,
    NLSConfig,
    PropagationError,
    Trajectory,
    compute_monitors,
    energy_functional,
    free_evolve,
    linear_evolve,
    nls_evolve,
)
from .scattering import (
    LimitEstimate,
    ScatteringError,
    ScatteringExtract,
    cone_moment,
    extract_scattering_state,
    extrapolate_limit,
    free_profile,
    scaled_moment,
    spectrum_at,
    verify_moment_theorem,
)
from .gronwall import (
    BoundCertificate,
    BoundVerification,
    GronwallError,
    GronwallProblem,
    build_partition,
    certify,
    fixed_point_by_bisection,
    implicit_root_bound,
    verify_bound,
    weight_integral,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    emit_outputs,
    load_report,
    make_datum,
    parse_config,
    run_experiment,
)
from .presets import preset_config, preset_names, preset_text

__version__ = "1.0.0"
