"""Bayesian posterior consistency for Gibbs measures on subshifts of finite type.

The numerical core lives in :mod:`gibbspost.thermo` (transfer operators,
pressure, Gibbs measures); posteriors are built in :mod:`gibbspost.posterior`
from likelihood specifications in :mod:`gibbspost.losses`.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegeneratePosteriorError,
    FitError,
    GibbsPostError,
    InputError,
    NumericError,
)
from .shift import SubshiftSpec, admissible_words, separation_metric  # noqa: E402
from .thermo import (  # noqa: E402
    GibbsMeasure,
    Potential,
    bernoulli_measure,
    cylinder_log_measure,
    entropy,
    gibbs_measure,
    markov_measure,
    normalize,
    pressure,
    relative_entropy,
    transfer_matrix,
)
from .sampling import SeededStream, sample_orbit, sample_orbits  # noqa: E402
from .posterior import (  # noqa: E402
    ParamFamily,
    PosteriorState,
    PriorMeasure,
    midpoint_grid,
    posterior_direct,
    posterior_exploss,
    posterior_psi,
    uniform_prior,
)
from .nonadditive import fekete_limit, free_energy, psi_star  # noqa: E402
from .cocycle import CocycleSpec, annealed_lyapunov, top_lyapunov_quenched  # noqa: E402
from .deviations import empirical_decay, ldp_rate_bound, rate_bound_direct  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError",
    "DegeneratePosteriorError",
    "FitError",
    "GibbsPostError",
    "InputError",
    "NumericError",
    "SubshiftSpec",
    "admissible_words",
    "separation_metric",
    "GibbsMeasure",
    "Potential",
    "bernoulli_measure",
    "cylinder_log_measure",
    "entropy",
    "gibbs_measure",
    "markov_measure",
    "normalize",
    "pressure",
    "relative_entropy",
    "transfer_matrix",
    "SeededStream",
    "sample_orbit",
    "sample_orbits",
    "ParamFamily",
    "PosteriorState",
    "PriorMeasure",
    "midpoint_grid",
    "posterior_direct",
    "posterior_exploss",
    "posterior_psi",
    "uniform_prior",
    "fekete_limit",
    "free_energy",
    "psi_star",
    "CocycleSpec",
    "annealed_lyapunov",
    "top_lyapunov_quenched",
    "empirical_decay",
    "ldp_rate_bound",
    "rate_bound_direct",
]
