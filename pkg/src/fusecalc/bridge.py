"""Evaluation of DL-calls against an interpretation.

Timed DL-atoms ``x : C @ t`` and ``(x, y) : r @ t`` are stored as ordinary
``IsAAt``/``HasAAt`` atoms; their projection at a time point is the ABox a
DL-call reasons over.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import dl
from .errors import EvaluationError, StaticError
from .kernel import (
    HASA, HASAAT, ISA, ISAAT, Fn, SetVal, Var, is_ground, substitute, term_key,
)
from .rules import AboxAt, DlCall, iter_literals

term_to_concept = dl.concept_from_term
concept_to_term = dl.concept_to_term


def assertion_from_term(t):
    """Turn a ground untimed DL-atom term into an ABox assertion."""
    try:
        if isinstance(t, Fn) and t.name == ISA:
            return dl.ConceptAssertion(t.args[0], dl.concept_from_term(t.args[1]))
        if isinstance(t, Fn) and t.name == HASA:
            x, r, y = t.args
            return dl.RoleAssertion(x, y, dl.role_from_term(r))
    except StaticError as e:
        raise EvaluationError(str(e)) from None
    raise EvaluationError(f"{t} is not a DL assertion")


def _abox_from_atoms(atoms):
    cs, rs = set(), set()
    for a in atoms:
        if a.neg:
            continue
        try:
            if a.pred == ISAAT:
                cs.add(dl.ConceptAssertion(a.args[0], dl.concept_from_term(a.args[1])))
            else:
                rs.add(dl.RoleAssertion(a.args[0], a.args[2], dl.role_from_term(a.args[1])))
        except StaticError as e:
            raise EvaluationError(f"{a}: {e}") from None
    return dl.ABox(frozenset(cs), frozenset(rs))


def induced_abox(interp, d) -> dl.ABox:
    """The ABox of all timed DL-atoms of ``interp`` at time ``d``."""
    atoms = list(interp.lookup((ISAAT, False), d)) + list(interp.lookup((HASAAT, False), d))
    return _abox_from_atoms(atoms)


def _assertion_set(value):
    if isinstance(value, SetVal):
        items = value.sorted_items()
    elif isinstance(value, Fn) and value.name == "List":
        items = value.args
    else:
        raise EvaluationError(f"{value} is not a set of DL assertions")
    return dl.ABox.of(assertion_from_term(t) for t in items)


def call_abox(interp, beta, pivot, call) -> dl.ABox:
    """The ABox a DL-call reasons over under matcher ``beta``."""
    if call.abox is None:
        if pivot is None:
            raise EvaluationError("a DL-call with the implicit ABox needs a pivot time")
        return induced_abox(interp, pivot)
    out = dl.ABox()
    for part in call.abox:
        if isinstance(part, AboxAt):
            t = substitute(part.time, beta)
            if not is_ground(t):
                raise EvaluationError(f"ABOXAT time {t} is unbound")
            out = out | induced_abox(interp, t.value)
        else:
            v = substitute(part, beta)
            if not is_ground(v):
                raise EvaluationError(f"ABox expression {v} is unbound")
            out = out | _assertion_set(v)
    return out


def _tbox(tboxes, name):
    try:
        return tboxes[name]
    except KeyError:
        raise EvaluationError(f"unknown tbox {name!r}") from None


def _query_individual_vars(query, beta):
    """Unbound variables in individual positions; concept/role variables must be bound."""
    out = []
    for q in query:
        q = substitute(q, beta)
        if q.name == ISA:
            inds, other = [q.args[0]], [q.args[1]]
        else:
            inds, other = [q.args[0], q.args[2]], [q.args[1]]
        for t in other:
            if not is_ground(t):
                raise EvaluationError(f"concept or role {t} in DL query is unbound")
        for t in inds:
            if isinstance(t, Var):
                if t.name not in out:
                    out.append(t.name)
            elif not is_ground(t):
                raise EvaluationError(f"individual {t} in DL query is only partly bound")
    return out


def eval_dl_call(interp, beta, pivot, call: DlCall, tboxes, use_una=True):
    """Matchers extending ``beta`` under which the DL-call holds (a list).

    Unbound individual variables of an entailment query range over the known
    individuals of the call's ABox and the constants of the query.
    """
    tbox = _tbox(tboxes, call.tbox)
    abox = call_abox(interp, beta, pivot, call)
    if call.kind in ("sat", "unsat"):
        sat = (dl.is_satisfiable_una(abox, tbox) if use_una
               else dl.is_satisfiable(abox, tbox))
        return [beta] if sat == (call.kind == "sat") else []
    free = _query_individual_vars(call.query, beta)
    if not free:
        query = [assertion_from_term(substitute(q, beta)) for q in call.query]
        return [beta] if dl.entails(abox, tbox, query, use_una) else []
    known = set(abox.individuals())
    for q in call.query:
        q = substitute(q, beta)
        for t in (q.args[0],) if q.name == ISA else (q.args[0], q.args[2]):
            if is_ground(t):
                known.add(t)
    domain = sorted(known, key=term_key)
    out = []
    for values in product(domain, repeat=len(free)):
        ext = dict(beta)
        ext.update(zip(free, values))
        query = [assertion_from_term(substitute(q, ext)) for q in call.query]
        if dl.entails(abox, tbox, query, use_una):
            out.append(ext)
    return out


@dataclass(frozen=True)
class LintWarning:
    rule_index: int
    rule: object
    literal: object
    message: str

    def __str__(self):
        where = self.rule.name or f"rule {self.rule_index}"
        return f"warning: {where}: {self.message}: {self.rule}"


def _reads_interpretation(call):
    return call.abox is None or any(isinstance(p, AboxAt) for p in call.abox)


def monotonicity_lint(program) -> list:
    """Warn about DL-calls whose truth can flip as the interpretation grows."""
    from .render import render_literal

    out = []
    for idx, rule in enumerate(program.rules):
        for lit, negative in iter_literals(rule.body):
            if not isinstance(lit, DlCall):
                continue
            if lit.kind == "sat" and not negative and rule.head is not None \
                    and _reads_interpretation(lit):
                out.append(LintWarning(
                    idx, rule, lit,
                    f"{render_literal(lit)} is satisfiability-based over a growing ABox "
                    "in a positive context and may be unsound"))
            elif lit.kind == "unsat" and negative:
                out.append(LintWarning(
                    idx, rule, lit,
                    f"{render_literal(lit)} under negation is satisfiability-based "
                    "and may be incomplete"))
    return out
