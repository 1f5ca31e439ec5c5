"""Simulator and consistency checker for nested-observer measurement scenarios.

The package is organized in four layers:

- :mod:`wfcheck.qcore`: dense linear-algebra kernel (states, unitaries,
  projective measurement, partial trace, Schmidt decomposition).
- :mod:`wfcheck.scenario`: a small line-oriented language describing
  systems, agents with memory records, observers, and a timeline of
  preparation, entangling interaction, measurement, and record readout.
- :mod:`wfcheck.interpret`: executes a scenario under one of three rule
  sets: orthodox collapse, relative facts, or relative facts plus
  deterministic cross-perspective record readout.
- :mod:`wfcheck.checks`: the consistency analyses built on top, each
  producing a structured report with a verdict.

``wfcheck.cli`` exposes the same functionality as a command-line tool.
"""

from importlib import resources as _resources

__version__ = "0.1.0"

from .qcore import (
    BasisSpec,
    DensityMatrix,
    ObservableFactor,
    ObservableSpec,
    SpaceLayout,
    StateVector,
    Unitary,
    ZeroProbabilityError,
    born_distribution,
    build_premeasurement,
    partial_trace,
    project,
    schmidt,
)
from .scenario import (
    Diagnostic,
    Scenario,
    ScenarioError,
    dumps,
    parse,
    record_key,
    validate,
)
from .interpret import (
    ConcurrencyError,
    LedgerEntry,
    PerspectiveState,
    PinRecord,
    RelativeFactLedger,
    RuleSet,
    RunResult,
    exact_joint,
    outcome_keys,
    perspective,
    predicted_distribution,
    run,
    sample_tallies,
)
from .checks import (
    AssignmentSearchResult,
    ContradictionReport,
    Finding,
    ParityConstraint,
    cpl_probability_check,
    epr_correlation_check,
    ghz_check,
    parity_search,
    substituted_parity_constraints,
)

BUNDLED_SCENARIOS = ("epr", "cpl", "ghz")


def bundled_scenario_text(name: str) -> str:
    """Source text of a bundled scenario file ("epr", "cpl", or "ghz")."""
    if name not in BUNDLED_SCENARIOS:
        raise ValueError(f"unknown bundled scenario {name!r}; choose from {BUNDLED_SCENARIOS}")
    path = _resources.files(__name__).joinpath("scenarios", f"{name}.wfs")
    return path.read_text(encoding="utf-8")


__all__ = [
    "__version__",
    "BUNDLED_SCENARIOS",
    "bundled_scenario_text",
    # qcore
    "BasisSpec",
    "DensityMatrix",
    "ObservableFactor",
    "ObservableSpec",
    "SpaceLayout",
    "StateVector",
    "Unitary",
    "ZeroProbabilityError",
    "born_distribution",
    "build_premeasurement",
    "partial_trace",
    "project",
    "schmidt",
    # scenario
    "Diagnostic",
    "Scenario",
    "ScenarioError",
    "dumps",
    "parse",
    "record_key",
    "validate",
    # interpret
    "ConcurrencyError",
    "LedgerEntry",
    "PerspectiveState",
    "PinRecord",
    "RelativeFactLedger",
    "RuleSet",
    "RunResult",
    "exact_joint",
    "outcome_keys",
    "perspective",
    "predicted_distribution",
    "run",
    "sample_tallies",
    # checks
    "AssignmentSearchResult",
    "ContradictionReport",
    "Finding",
    "ParityConstraint",
    "cpl_probability_check",
    "epr_correlation_check",
    "ghz_check",
    "parity_search",
    "substituted_parity_constraints",
]
