"""Sasakian lifts of Kähler charts, D-homothety deformations and identity checks."""

from .catalog import catalog, lookup
from .deform import HomothetyParams, apply_homothety, detwist_solve, soliton_constants_map
from .kahler import from_metric, from_potential
from .lift import build_lift
from .report import VerificationReport, emit_report, parse_report
from .scenario import Scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "HomothetyParams", "Scenario", "VerificationReport", "apply_homothety", "build_lift", "catalog",
    "detwist_solve", "emit_report", "from_metric", "from_potential", "lookup", "parse_report",
    "run_scenario", "soliton_constants_map",
]
