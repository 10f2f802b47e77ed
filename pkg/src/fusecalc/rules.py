"""Rule, body literal and program representation plus static checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import RangeRestrictionError, StaticError
from .kernel import (
    ISAAT, HASAAT, STEP, Atom, Num, Plus, Var, atom_vars, term_vars, time_index,
)

TIME_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class Ordinary:
    atom: Atom


@dataclass(frozen=True)
class Comprehension:
    """``p(x op tt, args) STH guard``: x is the latest (or earliest) time that qualifies."""

    var: str
    op: str
    bound: object
    atom: Atom  # time argument is Var(var)
    guard: tuple = ()


@dataclass(frozen=True)
class Builtin:
    op: str
    args: tuple


@dataclass(frozen=True)
class TimeCmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Let:
    var: str
    term: object


@dataclass(frozen=True)
class Choose:
    var: str
    terms: object


@dataclass(frozen=True)
class Collect:
    var: str
    template: object
    guard: tuple


@dataclass(frozen=True)
class MapRole:
    """Binds ``var`` to the role assertions {(x, filler) : role | x in set}."""

    var: str
    items: object
    role: object
    filler: object


@dataclass(frozen=True)
class AboxAt:
    """The induced ABox of the current interpretation at time ``time``."""

    time: object


@dataclass(frozen=True)
class DlCall:
    """A DL-call.

    ``kind`` is ``"entails"``, ``"sat"`` or ``"unsat"``.  ``abox`` is None for
    the implicit ABox at the pivot time, otherwise a tuple of parts (AboxAt
    or terms evaluating to a set of assertions) that are unioned.
    """

    kind: str
    tbox: str
    abox: Optional[tuple] = None
    query: tuple = ()


@dataclass(frozen=True)
class Not:
    body: tuple


Literal = Union[Ordinary, Comprehension, Builtin, TimeCmp, Let, Choose,
                Collect, MapRole, DlCall, Not]


@dataclass(frozen=True)
class Rule:
    """``head :- body``.

    ``head`` is None for a fail rule, else a tuple of disjuncts, each a tuple
    of atoms that are asserted together.
    """

    head: Optional[tuple]
    body: tuple = ()
    name: Optional[str] = field(default=None, compare=False)
    origin: str = field(default="user", compare=False)

    @property
    def is_fail(self):
        return self.head is None

    @property
    def is_fact(self):
        return self.head is not None and not self.body

    @property
    def is_disjunctive(self):
        return self.head is not None and len(self.head) > 1

    def head_atoms(self):
        if self.head is None:
            return []
        return [a for disjunct in self.head for a in disjunct]

    def __str__(self):
        from .render import render_rule
        return render_rule(self)


@dataclass
class Program:
    rules: list = field(default_factory=list)
    tboxes: dict = field(default_factory=dict)
    directives: dict = field(default_factory=dict)

    def extend(self, other: "Program"):
        """Merge ``other`` into this program in place and return self."""
        self.rules.extend(other.rules)
        for name, tbox in other.tboxes.items():
            if name in self.tboxes and self.tboxes[name] != tbox:
                raise StaticError(f"tbox {name!r} declared twice")
            self.tboxes[name] = tbox
        for key, value in other.directives.items():
            if key == "horizon":
                self.directives.setdefault("horizon", []).extend(value)
            else:
                self.directives[key] = value
        return self

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return (self.rules == other.rules and self.tboxes == other.tboxes
                and self.directives == other.directives)


# ---------------------------------------------------------------------------
# Free variables

def _dl_query_vars(call):
    out = set()
    for q in call.query:
        term_vars(q, out)
    return out


def _abox_vars(call):
    out = set()
    for part in call.abox or ():
        term_vars(part.time if isinstance(part, AboxAt) else part, out)
    return out


def fvar(b) -> set:
    """Free variables of a body literal or of a body (tuple/list of literals)."""
    if isinstance(b, (tuple, list)):
        out = set()
        for lit in b:
            out |= fvar(lit)
        return out
    if isinstance(b, Ordinary):
        return atom_vars(b.atom)
    if isinstance(b, Comprehension):
        out = {b.var} | term_vars(b.bound)
        return atom_vars(b.atom, out)
    if isinstance(b, Builtin):
        out = set()
        for t in b.args:
            term_vars(t, out)
        return out
    if isinstance(b, TimeCmp):
        return term_vars(b.left) | term_vars(b.right)
    if isinstance(b, Let):
        return {b.var} | term_vars(b.term)
    if isinstance(b, Choose):
        return {b.var} | term_vars(b.terms)
    if isinstance(b, Collect):
        return {b.var}
    if isinstance(b, MapRole):
        return {b.var} | term_vars(b.items) | term_vars(b.role) | term_vars(b.filler)
    if isinstance(b, DlCall):
        return _dl_query_vars(b) if b.kind == "entails" else set()
    if isinstance(b, Not):
        return set()
    raise TypeError(f"not a body literal: {b!r}")


def literal_vars(b) -> set:
    """Every variable occurring in a literal, including scoped ones."""
    if isinstance(b, (tuple, list)):
        out = set()
        for lit in b:
            out |= literal_vars(lit)
        return out
    if isinstance(b, Comprehension):
        return fvar(b) | literal_vars(b.guard)
    if isinstance(b, Collect):
        return {b.var} | term_vars(b.template) | literal_vars(b.guard)
    if isinstance(b, DlCall):
        return _dl_query_vars(b) | _abox_vars(b)
    if isinstance(b, Not):
        return literal_vars(b.body)
    return fvar(b)


def input_vars(b) -> set:
    """Variables a literal needs bound before it can be evaluated."""
    if isinstance(b, Comprehension):
        return term_vars(b.bound)
    if isinstance(b, Builtin):
        return fvar(b)
    if isinstance(b, Let):
        return term_vars(b.term)
    if isinstance(b, Choose):
        return term_vars(b.terms)
    if isinstance(b, MapRole):
        return term_vars(b.items) | term_vars(b.role) | term_vars(b.filler)
    if isinstance(b, DlCall):
        return _abox_vars(b)
    return set()


def iter_atoms(body, negative=False):
    """Yield (atom, in_negative_context, literal) for every ordinary atom in a body.

    Comprehension atoms and guards and COLLECT guards count as negative
    context, as do literals under ``not``.
    """
    for lit in body:
        if isinstance(lit, Ordinary):
            yield lit.atom, negative, lit
        elif isinstance(lit, Comprehension):
            yield lit.atom, True, lit
            yield from iter_atoms(lit.guard, True)
        elif isinstance(lit, Collect):
            yield from iter_atoms(lit.guard, True)
        elif isinstance(lit, Not):
            yield from iter_atoms(lit.body, True)


def iter_literals(body, negative=False):
    """Yield (literal, in_negative_context) for every literal, recursively."""
    for lit in body:
        yield lit, negative
        if isinstance(lit, Comprehension):
            yield from iter_literals(lit.guard, True)
        elif isinstance(lit, Collect):
            yield from iter_literals(lit.guard, True)
        elif isinstance(lit, Not):
            yield from iter_literals(lit.body, True)


# ---------------------------------------------------------------------------
# Static checks

def check_range_restricted(rule: Rule):
    if rule.head is None:
        return
    head_vars = set()
    for a in rule.head_atoms():
        atom_vars(a, head_vars)
    missing = head_vars - fvar(rule.body)
    if missing:
        raise RangeRestrictionError(rule, missing)


def check_collect_scoping(rule: Rule):
    """COLLECT template variables must not clash with any enclosing body's fvars."""

    def walk(body, outer):
        scope = outer | fvar(body)
        for lit in body:
            if isinstance(lit, Collect):
                clash = term_vars(lit.template) & (scope | {lit.var})
                if clash:
                    raise StaticError(
                        f"COLLECT template variable(s) {', '.join(sorted(clash))} "
                        f"also occur free in an enclosing body; rename them")
                walk(lit.guard, scope)
            elif isinstance(lit, Not):
                walk(lit.body, scope)
            elif isinstance(lit, Comprehension):
                walk(lit.guard, scope)

    walk(rule.body, set())


def _check_time_term(t, atom, ground_required):
    if isinstance(t, Num):
        return
    if isinstance(t, Var) or (isinstance(t, Plus) and isinstance(t.base, Var)):
        if ground_required:
            raise StaticError(f"fact {atom} has a non-ground time")
        return
    raise StaticError(f"time position of {atom} holds non-time term {t}")


def check_sorts(program: Program):
    """Arity consistency and well-sortedness of time positions."""
    arities = {ISAAT: 3, HASAAT: 4, STEP: 2}
    where = {}

    def visit(atom, fact):
        n = len(atom.args)
        known = arities.get(atom.pred)
        if known is None:
            arities[atom.pred] = n
            where[atom.pred] = atom
        elif known != n:
            raise StaticError(
                f"predicate {atom.pred} used with arity {n} in {atom} "
                f"but arity {known} elsewhere")
        i = time_index(atom.pred, n)
        if i is not None:
            _check_time_term(atom.args[i], atom, fact)

    for rule in program.rules:
        for a in rule.head_atoms():
            visit(a, rule.is_fact)
        for a, _neg, _lit in iter_atoms(rule.body):
            visit(a, False)
    for rule in program.rules:
        for lit, _neg in iter_literals(rule.body):
            if isinstance(lit, DlCall) and lit.tbox not in program.tboxes:
                raise StaticError(f"unknown tbox {lit.tbox!r}")


def check_nested_not(rule: Rule):
    for lit, _neg in iter_literals(rule.body):
        if isinstance(lit, Not):
            for inner, _ in iter_literals(lit.body):
                if isinstance(inner, Not):
                    raise StaticError("negative body literals may not be nested")


def check_program(program: Program):
    """Run every static check that does not need stratification."""
    for rule in program.rules:
        check_range_restricted(rule)
        check_nested_not(rule)
        check_collect_scoping(rule)
    check_sorts(program)
