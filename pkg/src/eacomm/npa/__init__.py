"""NPA relaxations for entanglement-assisted classical communication."""
from __future__ import annotations

from ..tasks import LinearFunctional
from .algebra import SCENARIOS, Algebra, BellScenario, EAScenario, Letter
from .moments import (
    LEVELS,
    MomentMatrix,
    ScenarioError,
    SdpProblem,
    build_moment_matrix,
    chsh_coefficients,
    objective_from_bell,
    objective_from_functional,
)
from .sdpa import export_sdpa, read_sdpa, write_sdpa
from .solver import SdpResult, SolverError, solve_sdp

__all__ = [
    "SCENARIOS", "LEVELS", "Algebra", "BellScenario", "EAScenario", "Letter",
    "MomentMatrix", "ScenarioError", "SdpProblem", "SdpResult", "SolverError",
    "build_moment_matrix", "chsh_coefficients", "objective_from_bell",
    "objective_from_functional", "export_sdpa", "read_sdpa", "write_sdpa",
    "solve_sdp", "npa_problem", "solve_bound", "upper_bound",
]


def _scenario(scenario: str | EAScenario | BellScenario) -> EAScenario | BellScenario:
    if isinstance(scenario, str):
        try:
            return SCENARIOS[scenario]
        except KeyError:
            raise ScenarioError(f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}") from None
    return scenario


def npa_problem(f: LinearFunctional | None, scenario, level=2, nonadaptive: bool = False,
                symmetrize: bool = False) -> SdpProblem:
    """The SDP whose optimum upper-bounds ``f`` over the scenario's strategies.

    For a plain Bell scenario ``f`` may be ``None``, meaning the CHSH expression.
    """
    scen = _scenario(scenario)
    mm = build_moment_matrix(scen, level, nonadaptive, symmetrize)
    if isinstance(scen, BellScenario):
        if f is not None:
            raise ScenarioError("Bell scenarios only support the built-in CHSH objective")
        return objective_from_bell(chsh_coefficients(), mm)
    return objective_from_functional(f, mm)


def solve_bound(f: LinearFunctional | None, scenario, level=2, nonadaptive: bool = False,
                symmetrize: bool = False, tol: float = 1e-7, max_iter: int = 200) -> SdpResult:
    """Build and solve; raise :class:`SolverError` unless the solver certifies ``tol``."""
    res = solve_sdp(npa_problem(f, scenario, level, nonadaptive, symmetrize), tol, max_iter)
    if not res.converged:
        raise SolverError(f"SDP solver did not converge ({res.status}, "
                          f"gap {res.relative_gap:.2e}, iterations {res.iterations})", res)
    return res


def upper_bound(f: LinearFunctional | None, scenario, level=2, nonadaptive: bool = False,
                symmetrize: bool = False, tol: float = 1e-7) -> float:
    """Certified upper bound on ``f`` at the given hierarchy level."""
    return solve_bound(f, scenario, level, nonadaptive, symmetrize, tol).upper
