"""Data, links, priors and the censored posterior of the quantile mixed model."""
from .data import (
    CENSOR_CODES,
    INTERVAL,
    LEFT,
    OBSERVED,
    RIGHT,
    AffineTransform,
    CensorKind,
    CensorStatus,
    DataTransforms,
    Dataset,
    Observation,
)
from .likelihood import (
    QMMPosterior,
    cd4_values,
    log_likelihood,
    log_posterior_unconstrained,
    log_prior,
    obs_loglik,
    population_curve,
    subject_logliks,
)
from .links import (
    BiexponentialLink,
    FixedEffects,
    LinearLink,
    LinkFunction,
    LinkKind,
    link_biexponential,
    link_linear,
    link_registry,
)
from .parameters import (
    Block,
    BlockKind,
    ModelParameters,
    ParameterLayout,
    ParameterVector,
    RandomEffectsSpec,
)
from .priors import (
    KappaPrior,
    KappaPriorKind,
    PriorSpec,
    half_t_logpdf,
    normal_logpdf,
    random_effects_logdensity,
    uniform_logpdf,
)
from .spec import ErrorModel, ModelSpec

__all__ = [
    'CENSOR_CODES',
    'INTERVAL',
    'LEFT',
    'OBSERVED',
    'RIGHT',
    'AffineTransform',
    'BiexponentialLink',
    'Block',
    'BlockKind',
    'CensorKind',
    'CensorStatus',
    'DataTransforms',
    'Dataset',
    'ErrorModel',
    'FixedEffects',
    'KappaPrior',
    'KappaPriorKind',
    'LinearLink',
    'LinkFunction',
    'LinkKind',
    'ModelParameters',
    'ModelSpec',
    'Observation',
    'ParameterLayout',
    'ParameterVector',
    'PriorSpec',
    'QMMPosterior',
    'RandomEffectsSpec',
    'cd4_values',
    'half_t_logpdf',
    'link_biexponential',
    'link_linear',
    'link_registry',
    'log_likelihood',
    'log_posterior_unconstrained',
    'log_prior',
    'normal_logpdf',
    'obs_loglik',
    'population_curve',
    'random_effects_logdensity',
    'subject_logliks',
    'uniform_logpdf',
]
