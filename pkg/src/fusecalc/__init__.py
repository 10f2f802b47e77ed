"""Possible models of stratified disjunctive logic programs with time and DL-calls."""
from .bridge import eval_dl_call, induced_abox, monotonicity_lint
from .engine import (
    Evaluator, compute_possible_models, satisfies, split_closure, unsupported_atoms,
    verify_model,
)
from .errors import (
    BudgetExceeded, EvaluationError, FusecalcError, ParseError, RangeRestrictionError,
    ReasonerUnknown, StaticError, StratificationError,
)
from .eventcalc import assemble, generate_steps, prelude, strong_negation_guards
from .kernel import Atom, Interpretation, apply, evaluate_builtin
from .oracle import ground_oracle
from .parser import parse_files, parse_program
from .render import read_machine, render_model, write_machine
from .rules import Program, Rule, fvar
from .strat import check_sbtp, compute_strata, dlcall_virtual_dependencies

__all__ = [
    "Atom", "BudgetExceeded", "EvaluationError", "Evaluator", "FusecalcError",
    "Interpretation", "ParseError", "Program", "RangeRestrictionError", "ReasonerUnknown",
    "Rule", "StaticError", "StratificationError", "apply", "assemble", "check_sbtp",
    "compute_possible_models", "compute_strata", "dlcall_virtual_dependencies",
    "eval_dl_call", "evaluate_builtin", "fvar", "generate_steps", "ground_oracle",
    "induced_abox", "monotonicity_lint", "parse_files", "parse_program", "prelude",
    "read_machine", "render_model", "satisfies", "split_closure",
    "strong_negation_guards", "unsupported_atoms", "verify_model", "write_machine",
]
