"""Ontology-mediated query evaluation over k-expressions and tree decompositions.

The main entry points are re-exported here; the ``omqcw`` command wraps them.
"""
from .cw_alci import eval_aq_alci, eval_ucq_alci, sat_alci
from .cw_gf2 import eval_aq_gf2, sat_gf2
from .errors import BudgetError, DialectError, EngineError, ParseError, ValidationError
from .kexpr import kexpr_matches, parse_kexpr, validate_kexpr
from .oracle import finite_model_oracle
from .parsing import parse_database, parse_ontology, parse_query
from .rewrite import rewrite
from .tw_gf2 import eval_aq_tw, eval_gf2_tw, sat_tw

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "DialectError", "EngineError", "ParseError", "ValidationError",
    "eval_aq_alci", "eval_aq_gf2", "eval_aq_tw", "eval_gf2_tw", "eval_ucq_alci",
    "finite_model_oracle", "kexpr_matches", "parse_database", "parse_kexpr", "parse_ontology",
    "parse_query", "rewrite", "sat_alci", "sat_gf2", "sat_tw", "validate_kexpr",
]
