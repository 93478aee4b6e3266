"""Analytic oracles, seeded test terrains and named validation cases."""

from .cases import CASES, ValidationReport, run_case
from .oracles import OracleError, exact_riemann_flux, exact_riemann_state, ritter_solution

__all__ = ["CASES", "OracleError", "ValidationReport", "exact_riemann_flux", "exact_riemann_state",
           "ritter_solution", "run_case"]
