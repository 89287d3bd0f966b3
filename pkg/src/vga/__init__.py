"""Virtual gap analysis: VGA efficiency models, the four-phase assessment and shortlisting."""

from .dataset import DatasetError, DecisionMatrix, dump_csv, load_csv, loads_csv, remove_dmu, table1
from .diagnostics import geometry, interlinkage, rtvs, technology_set, verify_duality
from .lp import LpError, LpNumericalError, LpProblem, LpSolution, RangingResult, range_rhs, solve
from .mcdm import Shortlist, build_shortlist
from .models import (
    VgaError,
    VgaSolution,
    VgaVariant,
    build_tap,
    build_tvg,
    compute_benchmarks,
    determine_goal_price,
    solve_two_step,
)
from .procedure import AssessmentDossier, classify, phase3_direction, run_assessment, verify_phase_relations

__all__ = [
    "AssessmentDossier", "DatasetError", "DecisionMatrix", "LpError", "LpNumericalError", "LpProblem",
    "LpSolution", "RangingResult", "Shortlist", "VgaError", "VgaSolution", "VgaVariant", "build_shortlist",
    "build_tap", "build_tvg", "classify", "compute_benchmarks", "determine_goal_price", "dump_csv", "geometry",
    "interlinkage", "load_csv", "loads_csv", "phase3_direction", "range_rhs", "remove_dmu", "rtvs",
    "run_assessment", "solve", "solve_two_step", "table1", "technology_set", "verify_duality",
    "verify_phase_relations",
]
