"""welfareopt: welfare-measure maximization by projected supergradient ascent.

The package has four layers:

* :mod:`welfareopt.welfare` -- welfare measures (weighted average, minimum,
  low-k average, vertex-set) with their dual weight sets, deterministic
  supergradient weight selection, and a randomized axiom checker.
* :mod:`welfareopt.solver` -- the projected ascent loop, feasible sets and
  projections, step schedules, and convergence-bound helpers.
* :mod:`welfareopt.wireless` -- the power-control application: interference
  networks, QoS maps, analytic utility gradients, scenario generation.
* :mod:`welfareopt.cli` -- an experiment harness sweeping k and QoS maps,
  emitting reproducible CSV traces, summaries and figure data.

:mod:`welfareopt.oracles` holds independent brute-force oracles used by the
test suite.
"""

from welfareopt._kernels import HAVE_COMPILED
from welfareopt.solver import (
    Box,
    FixedStep,
    InverseSqrtStep,
    LogPolytope,
    SolverError,
    SolverRun,
    UnsupportedConfigurationError,
    UtilityOracle,
    convergence_gap_bound,
    maximize_lowest_k,
    maximize_welfare,
    project,
    supergradient_norm_bound,
)
from welfareopt.welfare import (
    AverageWelfare,
    AxiomReport,
    LowKWelfare,
    MinimumWelfare,
    VertexSetWelfare,
    WelfareMeasure,
    check_axioms,
    sort_permutation,
    validate_weights,
)
from welfareopt.wireless import (
    IdentityQoS,
    Log1pQoS,
    LogQoS,
    NegPowerQoS,
    NetworkModel,
    WirelessUtilityOracle,
    generate_scenario,
    gradient_norm_cap,
    load_model,
    parse_qos,
    save_model,
    sinr,
    utility,
    utility_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "AverageWelfare",
    "AxiomReport",
    "Box",
    "FixedStep",
    "HAVE_COMPILED",
    "IdentityQoS",
    "InverseSqrtStep",
    "Log1pQoS",
    "LogPolytope",
    "LogQoS",
    "LowKWelfare",
    "MinimumWelfare",
    "NegPowerQoS",
    "NetworkModel",
    "SolverError",
    "SolverRun",
    "UnsupportedConfigurationError",
    "UtilityOracle",
    "VertexSetWelfare",
    "WelfareMeasure",
    "WirelessUtilityOracle",
    "check_axioms",
    "convergence_gap_bound",
    "generate_scenario",
    "gradient_norm_cap",
    "load_model",
    "maximize_lowest_k",
    "maximize_welfare",
    "parse_qos",
    "project",
    "save_model",
    "sinr",
    "sort_permutation",
    "supergradient_norm_bound",
    "utility",
    "utility_gradient",
    "validate_weights",
]
