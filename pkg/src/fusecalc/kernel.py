"""Terms, atoms, substitutions, built-ins and the interpretation store.

Terms are immutable and hashable.  Substitutions are plain dicts mapping a
variable *name* to a ground term; every function here treats them as
read-only and returns fresh dicts when extending them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Union

from .errors import EvaluationError, StaticError

#: functor of untimed concept membership terms ``x : C``
ISA = ":"
#: functor of untimed role membership terms ``(x, y) : r``; args are (x, r, y)
HASA = "::"

ANON_PREFIX = "_#"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self):
        return "_" if self.name.startswith(ANON_PREFIX) else self.name


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Num:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Str:
    value: str

    def __str__(self):
        return json.dumps(self.value, ensure_ascii=False)


@dataclass(frozen=True, slots=True)
class Fn:
    name: str
    args: tuple

    def __str__(self):
        if self.name == ISA:
            return f"{self.args[0]} : {self.args[1]}"
        if self.name == HASA:
            x, r, y = self.args
            return f"({x}, {y}) : {r}"
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True, slots=True)
class Plus:
    """A time expression ``base + offset``; folded to a Num once base is ground."""

    base: "Term"
    offset: int

    def __str__(self):
        sign = "+" if self.offset >= 0 else "-"
        return f"{self.base}{sign}{abs(self.offset)}"


@dataclass(frozen=True, slots=True)
class SetVal:
    """A finite set of terms; equality is set equality."""

    items: frozenset

    def __str__(self):
        return f"Set({', '.join(str(t) for t in sorted(self.items, key=term_key))})"

    def sorted_items(self):
        return sorted(self.items, key=term_key)


Term = Union[Var, Const, Num, Str, Fn, Plus, SetVal]


def term_key(t):
    """Total order on terms used for every deterministic listing."""
    if isinstance(t, Num):
        return (0, t.value)
    if isinstance(t, Str):
        return (1, t.value)
    if isinstance(t, Const):
        return (2, t.name)
    if isinstance(t, Fn):
        return (3, t.name, len(t.args), tuple(term_key(a) for a in t.args))
    if isinstance(t, SetVal):
        return (4, tuple(term_key(a) for a in t.sorted_items()))
    if isinstance(t, Var):
        return (5, t.name)
    return (6, term_key(t.base), t.offset)


def isa(x, concept):
    return Fn(ISA, (x, concept))


def hasa(x, role, y):
    return Fn(HASA, (x, role, y))


# ---------------------------------------------------------------------------
# Atoms

ISAAT = "IsAAt"
HASAAT = "HasAAt"
STEP = "Step"


def time_index(pred, arity):
    """Position of the time argument, or None for propositional atoms."""
    if arity == 0:
        return None
    if pred == ISAAT:
        return 2
    if pred == HASAAT:
        return 3
    return 0


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple = ()
    neg: bool = False

    @property
    def key(self):
        return (self.pred, self.neg)

    @property
    def time_term(self):
        i = time_index(self.pred, len(self.args))
        return None if i is None else self.args[i]

    @property
    def time(self):
        """The integer time of a ground atom (None when untimed)."""
        t = self.time_term
        return None if t is None else t.value

    def positive(self):
        return Atom(self.pred, self.args) if self.neg else self

    def __str__(self):
        if self.pred == ISAAT and len(self.args) == 3:
            x, c, t = self.args
            body = f"{x} : {c} @ {t}"
        elif self.pred == HASAAT and len(self.args) == 4:
            x, r, y, t = self.args
            body = f"({x}, {y}) : {r} @ {t}"
        elif self.args:
            body = f"{self.pred}({', '.join(map(str, self.args))})"
        else:
            body = self.pred
        return f"neg({body})" if self.neg else body


def atom_key(a):
    """Order atoms by predicate, time, then arguments."""
    t = a.time
    return (a.pred, t is not None, t if t is not None else 0,
            tuple(term_key(x) for x in a.args), a.neg)


def key_name(key):
    pred, neg = key
    return f"neg {pred}" if neg else pred


# ---------------------------------------------------------------------------
# Variables and substitution

def term_vars(t, out=None):
    if out is None:
        out = set()
    if isinstance(t, Var):
        out.add(t.name)
    elif isinstance(t, Fn):
        for a in t.args:
            term_vars(a, out)
    elif isinstance(t, Plus):
        term_vars(t.base, out)
    elif isinstance(t, SetVal):
        for a in t.items:
            term_vars(a, out)
    return out


def atom_vars(a, out=None):
    if out is None:
        out = set()
    for t in a.args:
        term_vars(t, out)
    return out


def is_ground(t):
    if isinstance(t, (Const, Num, Str)):
        return True
    if isinstance(t, Var):
        return False
    if isinstance(t, Fn):
        return all(is_ground(a) for a in t.args)
    if isinstance(t, SetVal):
        return all(is_ground(a) for a in t.items)
    return False  # Plus is folded away when ground


def substitute(t, subst: Mapping[str, Term]):
    """Apply a substitution to a term, folding ground time expressions."""
    if isinstance(t, Var):
        return subst.get(t.name, t)
    if isinstance(t, (Const, Num, Str)):
        return t
    if isinstance(t, Fn):
        return Fn(t.name, tuple(substitute(a, subst) for a in t.args))
    if isinstance(t, Plus):
        base = substitute(t.base, subst)
        if isinstance(base, Num):
            return Num(base.value + t.offset)
        if isinstance(base, Plus):
            return Plus(base.base, base.offset + t.offset)
        return Plus(base, t.offset)
    return SetVal(frozenset(substitute(a, subst) for a in t.items))


def substitute_atom(a, subst):
    return Atom(a.pred, tuple(substitute(t, subst) for t in a.args), a.neg)


def apply(subst, e):
    """``e`` with every variable of ``dom(subst)`` replaced."""
    if isinstance(e, Atom):
        return substitute_atom(e, subst)
    return substitute(e, subst)


def match_term(pattern, ground, subst):
    """One-way matching of ``pattern`` against a ground term.

    Returns the extended substitution, or None when they do not match.
    ``subst`` itself is never modified.
    """
    if isinstance(pattern, Var):
        bound = subst.get(pattern.name)
        if bound is None:
            out = dict(subst)
            out[pattern.name] = ground
            return out
        return subst if bound == ground else None
    if isinstance(pattern, Fn):
        if not isinstance(ground, Fn) or ground.name != pattern.name \
                or len(ground.args) != len(pattern.args):
            return None
        for p, g in zip(pattern.args, ground.args):
            subst = match_term(p, g, subst)
            if subst is None:
                return None
        return subst
    if isinstance(pattern, Plus):
        if not isinstance(ground, Num):
            return None
        return match_term(pattern.base, Num(ground.value - pattern.offset), subst)
    if isinstance(pattern, SetVal) and not is_ground(pattern):
        pattern = substitute(pattern, subst)
        if not is_ground(pattern):
            raise EvaluationError(f"cannot match non-ground set pattern {pattern}")
    return subst if pattern == ground else None


def match_args(patterns, grounds, subst):
    for p, g in zip(patterns, grounds):
        subst = match_term(p, g, subst)
        if subst is None:
            return None
    return subst


# ---------------------------------------------------------------------------
# Built-in predicates

def _ordered(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return a.value, b.value
    if isinstance(a, Str) and isinstance(b, Str):
        return a.value, b.value
    raise EvaluationError(f"cannot compare {a} and {b}")


def _contains(s, x):
    if isinstance(s, SetVal):
        return x in s.items
    if isinstance(s, Fn) and s.name == "List":
        return x in s.args
    raise EvaluationError(f"{s} is not a set")


BUILTINS: dict[str, Callable[[Term, Term], bool]] = {
    "<": lambda a, b: (lambda x, y: x < y)(*_ordered(a, b)),
    "<=": lambda a, b: (lambda x, y: x <= y)(*_ordered(a, b)),
    ">": lambda a, b: (lambda x, y: x > y)(*_ordered(a, b)),
    ">=": lambda a, b: (lambda x, y: x >= y)(*_ordered(a, b)),
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "∋": _contains,
    "∈": lambda a, b: _contains(b, a),
}

COMPARISONS = ("<", "<=", ">", ">=")


def check_builtin(p):
    if p not in BUILTINS:
        raise StaticError(f"unknown built-in predicate {p!r}")


def evaluate_builtin(p, args):
    """Truth value of built-in ``p`` on ground arguments."""
    check_builtin(p)
    for a in args:
        if not is_ground(a):
            raise EvaluationError(f"built-in {p} called with non-ground argument {a}")
    return bool(BUILTINS[p](*args))


# ---------------------------------------------------------------------------
# Interpretations

class Interpretation:
    """A finite set of ground atoms indexed by (predicate key, time).

    Iteration follows insertion order, which keeps model computation
    deterministic across interpreter runs.
    """

    __slots__ = ("_atoms", "_index", "_by_key", "_times")

    def __init__(self, atoms: Iterable[Atom] = ()):
        self._atoms: dict[Atom, None] = {}
        self._index: dict[tuple, dict[Atom, None]] = {}
        self._by_key: dict[tuple, dict[Atom, None]] = {}
        self._times: dict[int, None] = {}
        for a in atoms:
            self.add(a)

    def add(self, atom: Atom) -> bool:
        if atom in self._atoms:
            return False
        t = atom.time
        self._atoms[atom] = None
        self._index.setdefault((atom.key, t), {})[atom] = None
        self._by_key.setdefault(atom.key, {})[atom] = None
        if t is not None:
            self._times[t] = None
        return True

    def copy(self):
        new = Interpretation.__new__(Interpretation)
        new._atoms = dict(self._atoms)
        new._index = {k: dict(v) for k, v in self._index.items()}
        new._by_key = {k: dict(v) for k, v in self._by_key.items()}
        new._times = dict(self._times)
        return new

    def lookup(self, key, time) -> Iterable[Atom]:
        return self._index.get((key, time), ())

    def by_key(self, key) -> Iterable[Atom]:
        return self._by_key.get(key, ())

    def times(self):
        return sorted(self._times)

    def keys(self):
        return list(self._by_key)

    def frozen(self) -> frozenset:
        return frozenset(self._atoms)

    def sorted(self):
        return sorted(self._atoms, key=atom_key)

    def __contains__(self, atom):
        return atom in self._atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._atoms)

    def __len__(self):
        return len(self._atoms)

    def __eq__(self, other):
        if isinstance(other, Interpretation):
            return self._atoms.keys() == other._atoms.keys()
        if isinstance(other, (set, frozenset)):
            return self._atoms.keys() == other
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return "Interpretation({" + ", ".join(str(a) for a in self.sorted()) + "})"
