"""Two-qubit negativity and discord under classical telegraph and 1/f^alpha
dephasing noise: closed-form dynamics, spectrum synthesis, and a Monte Carlo
trajectory oracle that validates the closed forms."""

from .qstate import (
    BellMixture,
    InvalidStateError,
    TwoQubitDensityMatrix,
    bell_mixture_to_matrix,
    partial_trace,
    partial_transpose,
    von_neumann_entropy,
)
from .correlations import (
    CorrelationPoint,
    discord_bell_diagonal,
    discord_bruteforce_oracle,
    h_function,
    negativity,
)
from .rtn import (
    RtnParams,
    RtnTrajectory,
    d_coefficient,
    dephasing_coefficient,
    phase_distribution,
    phase_of,
    phase_pdf,
    rtn_psd,
    sample_trajectory,
)
from .noise_spectra import (
    RateDistribution,
    collection_spectrum,
    rate_pdf,
    sample_rate,
    synthesized_spectrum,
)
from .dynamics import (
    CorrelationSeries,
    QuadratureError,
    Scenario,
    ScenarioConfig,
    Topology,
    evolve_series,
    gamma_ce,
    gamma_de,
    gamma_random,
    lambda_ce,
    lambda_de,
)
from .mc_engine import (
    McConfig,
    McEstimate,
    estimate_coefficient,
    estimate_correlations,
    evolve_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BellMixture",
    "InvalidStateError",
    "TwoQubitDensityMatrix",
    "bell_mixture_to_matrix",
    "partial_trace",
    "partial_transpose",
    "von_neumann_entropy",
    "CorrelationPoint",
    "discord_bell_diagonal",
    "discord_bruteforce_oracle",
    "h_function",
    "negativity",
    "RtnParams",
    "RtnTrajectory",
    "d_coefficient",
    "dephasing_coefficient",
    "phase_distribution",
    "phase_of",
    "phase_pdf",
    "rtn_psd",
    "sample_trajectory",
    "RateDistribution",
    "collection_spectrum",
    "rate_pdf",
    "sample_rate",
    "synthesized_spectrum",
    "CorrelationSeries",
    "QuadratureError",
    "Scenario",
    "ScenarioConfig",
    "Topology",
    "evolve_series",
    "gamma_ce",
    "gamma_de",
    "gamma_random",
    "lambda_ce",
    "lambda_de",
    "McConfig",
    "McEstimate",
    "estimate_coefficient",
    "estimate_correlations",
    "evolve_trajectory",
]
