"""Bipointed SOS specifications, applied constructively to finite systems.

Validate rule specifications for streams, (non)deterministic automata,
labelled and weighted transition systems, apply the specified operations to
finite systems, and certify the results with bisimulation, lasso and
language-equivalence checks.
"""

from .behaviors import (
    FiniteCoalgebra,
    Kind,
    PointedCoalgebra,
    disjoint_union,
    reachable,
    system_from_json,
    system_to_json,
    validate,
)
from .bisim import Partition, bisimilar, coarsest_bisimulation, minimize
from .errors import BudgetError, InputError, RatfixError
from .langops import enumerate_words, language_equiv, nda_to_dfa, word_shuffle
from .sosdsl import SpecDoc, SpecParseError, parse_spec, pretty_print, validate_spec
from .streams import Lasso, detect_lasso, gsos_unfold, lasso_of, lasso_to_system, parse_gsos_spec
from .synthesis import OpApp, Plain, eval_term, lambda_step, synthesize

__all__ = [
    "BudgetError",
    "FiniteCoalgebra",
    "InputError",
    "Kind",
    "Lasso",
    "OpApp",
    "Partition",
    "Plain",
    "PointedCoalgebra",
    "RatfixError",
    "SpecDoc",
    "SpecParseError",
    "bisimilar",
    "coarsest_bisimulation",
    "detect_lasso",
    "disjoint_union",
    "enumerate_words",
    "eval_term",
    "gsos_unfold",
    "lambda_step",
    "language_equiv",
    "lasso_of",
    "lasso_to_system",
    "minimize",
    "nda_to_dfa",
    "parse_gsos_spec",
    "parse_spec",
    "pretty_print",
    "reachable",
    "synthesize",
    "system_from_json",
    "system_to_json",
    "validate",
    "validate_spec",
    "word_shuffle",
]
