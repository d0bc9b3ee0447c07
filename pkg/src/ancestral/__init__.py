"""Exact inference and confidence scoring of ancestral causal relations
from weighted conditional-(in)dependence and intervention statements."""

from ancestral.core import (
    AncestralStructure,
    Ancestry,
    AncStatement,
    CiStatement,
    CycleError,
    HARD,
    Polarity,
    Weight,
    WeightedInput,
    canonicalize,
    causes,
    condset,
    condset_members,
    count_ancestral_structures,
    dep,
    enumerate_ancestral_structures,
    indep,
    is_ancestral_structure,
    not_causes,
    transitive_close,
)
from ancestral.rules import CiAssignment, JointAssignment, check_consistency, derive_closure, loss
from ancestral.solver import (
    SolveOptions,
    SolveResult,
    SolveTimeoutError,
    brute_force_min_loss,
    solve_min_loss,
)
from ancestral.scoring import (
    BothInfeasibleError,
    Identifiability,
    NoConsistentModelError,
    Prediction,
    confidence,
    identifiability_oracle,
    score_all_pairs,
)

__all__ = [
    "AncestralStructure",
    "Ancestry",
    "AncStatement",
    "BothInfeasibleError",
    "CiAssignment",
    "CiStatement",
    "CycleError",
    "HARD",
    "Identifiability",
    "JointAssignment",
    "NoConsistentModelError",
    "Polarity",
    "Prediction",
    "SolveOptions",
    "SolveResult",
    "SolveTimeoutError",
    "Weight",
    "WeightedInput",
    "brute_force_min_loss",
    "canonicalize",
    "causes",
    "check_consistency",
    "condset",
    "condset_members",
    "confidence",
    "count_ancestral_structures",
    "dep",
    "derive_closure",
    "enumerate_ancestral_structures",
    "identifiability_oracle",
    "indep",
    "is_ancestral_structure",
    "loss",
    "not_causes",
    "score_all_pairs",
    "solve_min_loss",
    "transitive_close",
]
