"""Bayesian finite element model updating of a cantilever beam with MCMC."""

from .diagnostics import ChainDiagnostics, diagnostics, effective_sample_size
from .errors import (
    ConfigError,
    InvalidInputError,
    NumericalError,
    SamplerError,
    StencilOutOfBoundsError,
)
from .fem_beam import (
    BeamModel,
    ElementProperties,
    ModalSolution,
    SystemMatrices,
    assemble,
    assemble_arrays,
    cantilever_frequency,
    element_matrices,
    guyan_reduce,
    modal_residual,
    natural_frequencies,
    solve_modes,
)
from .harness import (
    CaseStudy,
    Report,
    SamplerConfig,
    builtin_case,
    compare,
    emit_report,
    format_comparison,
    format_report,
    load_report,
    parse_config,
    run_case,
)
from .posterior import (
    ModalData,
    ParameterEntry,
    ParameterSpace,
    PosteriorDensity,
    finite_difference_gradient,
    z_data,
    z_prior,
)
from .samplers import Chain, HmcState, Target, estimate, hmc_sample, leapfrog, mh_sample, slice_sample

__version__ = "0.1.0"
