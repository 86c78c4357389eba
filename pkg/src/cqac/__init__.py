"""Containment and view-based rewriting for conjunctive queries with arithmetic comparisons."""

from .ac_core import ACSet, Comparison, closure, implication_holds, implies, is_consistent, minimal_form
from .query_model import CQACQuery, Database, evaluate, normalize, parse, parse_database, parse_query, parse_views
from .containment import (
    canonical_oracle_check,
    classify_fragment,
    entailment_check,
    enumerate_mappings,
    fast_contains,
)
from .datalog import DatalogProgram, contains_cq, evaluate_program, parse_program
from .hardness_gen import eval_pi2sat, parse_formula, reduce_pi2sat
from .transform import containment_via_transform, to_cq, to_datalog
from .rewriting import (
    certain_answers,
    certain_answers_oracle,
    check_contained_rewriting,
    mcr_rsi1,
    mcr_rsi1_plus,
)

__version__ = "0.1.0"
