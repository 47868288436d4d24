"""Random measures on the rapid points of Brownian motion.

Simulation of the multi-stage rapid-interval construction, closed-form
Fourier-Stieltjes transforms of the resulting measures, decay/dimension
estimators, and a verification laboratory for the supporting
inequalities.
"""

from .brownian import PathGrid, gauge, generate_path, oscillation, refine_path
from .chain import ChainSample, measures_from_sample, sample_chain
from .config import ExperimentConfig, auto_beta_schedule
from .errors import (
    ChainDiedError,
    DomainError,
    EmptyMeasureError,
    GridMismatchError,
    InsufficientResolutionError,
    InvalidArgumentError,
)
from .fourier import (
    DecayFit,
    SpectrumGrid,
    decay_exponent,
    fourier_dimension_estimate,
    lemma22_check,
    log_frequency_grid,
    transform_measure,
    transform_uniform,
)
from .measure import (
    MeasureChain,
    StageMeasure,
    box_dimension_estimate,
    build_measure_chain,
    build_stage_measure,
    mass_monotonicity_check,
    total_mass,
)
from .selection import (
    ProbabilityEstimate,
    SelectionMask,
    StageConfig,
    analytic_probability_bounds,
    check_nesting,
    estimate_selection_probability,
    select_rapid,
    selection_threshold,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
