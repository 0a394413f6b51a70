"""Higher-order corrected trapezoidal rules with sharp error bounds."""

from .bounds import alexiewicz_norm, apriori_bound, k_constant, lp_norm_estimate
from .composite import CompositePlan, composite_apply, composite_bound
from .expr import eval_expr, jet_eval, parse
from .oracle import integrate
from .polynomials import RuleFamily, monic_on_interval
from .rules import apply, generic_rule, weights

__all__ = [
    "RuleFamily",
    "monic_on_interval",
    "parse",
    "jet_eval",
    "eval_expr",
    "weights",
    "apply",
    "generic_rule",
    "CompositePlan",
    "composite_apply",
    "composite_bound",
    "k_constant",
    "lp_norm_estimate",
    "alexiewicz_norm",
    "apriori_bound",
    "integrate",
]
