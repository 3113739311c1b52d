"""Short-time free propagation out of a compact support, uni-directional
currents for quantum and diffusive dynamics, and Zeno-type survival laws."""

from ._accel import get_backend, set_backend
from ._version import __version__
from .config import ExperimentConfig
from .diffusion import (
    DensityField,
    DiffusionModel,
    FluxEstimate,
    SurvivalCurve,
    extrapolate_net_flux,
    flux_lr_finite_dt,
    flux_rl_finite_dt,
    gaussian_moment_identities,
    net_flux_closed_form,
    simulate_absorbing,
)
from .errors import ConvergenceFailure, InvalidArgument, UnicurrentError
from .fresnel import RegularizationPolicy, TailWeight, fresnel_moment, propagator_kernel_integral, tail_weighted_integral
from .propagation import (
    CurrentEstimate,
    CurrentKind,
    PropagationResult,
    feynman_limit_current,
    mass_beyond,
    propagate,
    schrodinger_current,
    unidirectional_current_lr,
    validity_bound,
)
from .scaling import DecayLaw, SweepResult, SurvivalStatistics, decay_law, fit_exponent, run_sweep, zeno_survival
from .wavefunction import (
    BoundaryClass,
    BoxEigenstate,
    GridWavefunction,
    NaturalUnits,
    PiecewiseWavefunction,
    SupportKind,
    classify_boundary,
    eigenstate_coefficients,
    evaluate,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
