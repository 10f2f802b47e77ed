"""ALCIF concepts, ABoxes, TBoxes and a tableau satisfiability procedure.

The tableau works on a completion graph whose root nodes are the ABox
individuals.  GCIs with an atomic left-hand side are absorbed and unfolded
lazily; all others are internalized into every node label.  Functional
roles are handled by merging neighbours, and termination on general TBoxes
with inverse roles comes from pairwise blocking.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .errors import ReasonerUnknown, StaticError
from .kernel import Const, Fn, Term, term_key

DEFAULT_BUDGET = 200_000


# ---------------------------------------------------------------------------
# Concepts and roles

@dataclass(frozen=True)
class Role:
    name: str
    inverse: bool = False

    def inv(self):
        return Role(self.name, not self.inverse)

    def __str__(self):
        return f"Inverse({self.name})" if self.inverse else self.name


@dataclass(frozen=True)
class Name:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "Top"


@dataclass(frozen=True)
class Bottom:
    def __str__(self):
        return "Bottom"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        return f"Not({self.arg})"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"And({self.left}, {self.right})"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self):
        return f"Or({self.left}, {self.right})"


@dataclass(frozen=True)
class Exists:
    role: Role
    filler: object

    def __str__(self):
        return f"Exists({self.role}, {self.filler})"


@dataclass(frozen=True)
class Forall:
    role: Role
    filler: object

    def __str__(self):
        return f"Forall({self.role}, {self.filler})"


TOP = Top()
BOTTOM = Bottom()


def nnf(c):
    """Negation normal form: negation is pushed down to concept names."""
    if isinstance(c, And):
        return And(nnf(c.left), nnf(c.right))
    if isinstance(c, Or):
        return Or(nnf(c.left), nnf(c.right))
    if isinstance(c, Exists):
        return Exists(c.role, nnf(c.filler))
    if isinstance(c, Forall):
        return Forall(c.role, nnf(c.filler))
    if not isinstance(c, Not):
        return c
    a = c.arg
    if isinstance(a, Name):
        return c
    if isinstance(a, Top):
        return BOTTOM
    if isinstance(a, Bottom):
        return TOP
    if isinstance(a, Not):
        return nnf(a.arg)
    if isinstance(a, And):
        return Or(nnf(Not(a.left)), nnf(Not(a.right)))
    if isinstance(a, Or):
        return And(nnf(Not(a.left)), nnf(Not(a.right)))
    if isinstance(a, Exists):
        return Forall(a.role, nnf(Not(a.filler)))
    if isinstance(a, Forall):
        return Exists(a.role, nnf(Not(a.filler)))
    raise TypeError(f"not a concept: {a!r}")


def concept_names(c, out=None):
    if out is None:
        out = set()
    if isinstance(c, Name):
        out.add(c.name)
    elif isinstance(c, Not):
        concept_names(c.arg, out)
    elif isinstance(c, (And, Or)):
        concept_names(c.left, out)
        concept_names(c.right, out)
    elif isinstance(c, (Exists, Forall)):
        concept_names(c.filler, out)
    return out


_NARY = {"And": And, "Or": Or}


def concept_from_term(t):
    """Read a concept expression from its term spelling, e.g. ``And(Box, Exists(Temp, C))``."""
    if isinstance(t, Const):
        if t.name in ("Top", "Thing"):
            return TOP
        if t.name in ("Bottom", "Nothing"):
            return BOTTOM
        return Name(t.name)
    if isinstance(t, Fn):
        if t.name in _NARY and len(t.args) >= 1:
            parts = [concept_from_term(a) for a in t.args]
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = _NARY[t.name](p, out)
            return out
        if t.name in ("Not", "Neg") and len(t.args) == 1:
            return Not(concept_from_term(t.args[0]))
        if t.name in ("Exists", "Some") and len(t.args) == 2:
            return Exists(role_from_term(t.args[0]), concept_from_term(t.args[1]))
        if t.name in ("Forall", "All") and len(t.args) == 2:
            return Forall(role_from_term(t.args[0]), concept_from_term(t.args[1]))
    raise StaticError(f"{t} is not a concept expression")


def role_from_term(t):
    if isinstance(t, Const):
        return Role(t.name)
    if isinstance(t, Fn) and t.name == "Inverse" and len(t.args) == 1:
        return role_from_term(t.args[0]).inv()
    raise StaticError(f"{t} is not a role expression")


def concept_to_term(c):
    if isinstance(c, Name):
        return Const(c.name)
    if isinstance(c, Top):
        return Const("Top")
    if isinstance(c, Bottom):
        return Const("Bottom")
    if isinstance(c, Not):
        return Fn("Not", (concept_to_term(c.arg),))
    if isinstance(c, (And, Or)):
        return Fn(type(c).__name__, (concept_to_term(c.left), concept_to_term(c.right)))
    return Fn(type(c).__name__, (role_to_term(c.role), concept_to_term(c.filler)))


def role_to_term(r):
    return Fn("Inverse", (Const(r.name),)) if r.inverse else Const(r.name)


# ---------------------------------------------------------------------------
# Knowledge bases

@dataclass(frozen=True)
class ConceptAssertion:
    ind: Term
    concept: object

    def __str__(self):
        return f"{self.ind} : {self.concept}"


@dataclass(frozen=True)
class RoleAssertion:
    subj: Term
    obj: Term
    role: Role

    def __str__(self):
        return f"({self.subj}, {self.obj}) : {self.role}"


@dataclass(frozen=True)
class ABox:
    concepts: frozenset = frozenset()
    roles: frozenset = frozenset()

    @classmethod
    def of(cls, assertions):
        cs, rs = set(), set()
        for a in assertions:
            (cs if isinstance(a, ConceptAssertion) else rs).add(a)
        return cls(frozenset(cs), frozenset(rs))

    def __or__(self, other):
        return ABox(self.concepts | other.concepts, self.roles | other.roles)

    def __iter__(self):
        yield from self.concepts
        yield from self.roles

    def __len__(self):
        return len(self.concepts) + len(self.roles)

    def individuals(self):
        out = {a.ind for a in self.concepts}
        for r in self.roles:
            out.add(r.subj)
            out.add(r.obj)
        return out


@dataclass(frozen=True)
class TBox:
    gcis: tuple = ()
    functional: frozenset = frozenset()

    def is_functional(self, role):
        return role in self.functional


def assertion_individuals(assertions):
    out = set()
    for a in assertions:
        if isinstance(a, ConceptAssertion):
            out.add(a.ind)
        else:
            out.add(a.subj)
            out.add(a.obj)
    return out


def una(individuals):
    """Assertions forcing the given individuals to be pairwise distinct."""
    inds = sorted(set(individuals), key=term_key)
    out = set()
    for a, b in combinations(inds, 2):
        n = Name(f"N_({a},{b})")
        out.add(ConceptAssertion(a, n))
        out.add(ConceptAssertion(b, Not(n)))
    return out


# ---------------------------------------------------------------------------
# Tableau

class _Prepared:
    """TBox preprocessed for the tableau."""

    def __init__(self, tbox: TBox):
        self.absorbed: dict = {}
        self.global_concepts: list = []
        for lhs, rhs in tbox.gcis:
            rhs = nnf(rhs)
            if isinstance(lhs, Name):
                self.absorbed.setdefault(lhs, []).append(rhs)
            elif isinstance(lhs, Top):
                self.global_concepts.append(rhs)
            else:
                self.global_concepts.append(nnf(Or(Not(lhs), rhs)))
        self.functional = frozenset(tbox.functional)


def _ckey(c):
    return str(c)


class _Graph:
    __slots__ = ("prep", "labels", "edges", "parent", "next_id", "clash", "queue")

    def __init__(self, prep):
        self.prep = prep
        self.labels: dict = {}
        self.edges: dict = {}
        self.parent: dict = {}
        self.next_id = 0
        self.clash = False
        self.queue: deque = deque()

    def copy(self):
        g = _Graph.__new__(_Graph)
        g.prep = self.prep
        g.labels = {k: set(v) for k, v in self.labels.items()}
        g.edges = {k: {n: set(rs) for n, rs in v.items()} for k, v in self.edges.items()}
        g.parent = dict(self.parent)
        g.next_id = self.next_id
        g.clash = self.clash
        g.queue = deque()
        return g

    def new_node(self, parent=None):
        x = self.next_id
        self.next_id += 1
        self.labels[x] = set()
        self.edges[x] = {}
        if parent is not None:
            self.parent[x] = parent
        for c in self.prep.global_concepts:
            self.add_concept(x, c)
        return x

    def is_root(self, x):
        return x not in self.parent

    def neighbours(self, x, role):
        return sorted(y for y, rs in self.edges[x].items() if role in rs)

    def add_concept(self, x, c):
        label = self.labels[x]
        if c not in label:
            label.add(c)
            self.queue.append(("c", x, c))

    def add_edge(self, x, y, role):
        rs = self.edges[x].setdefault(y, set())
        if role in rs:
            return
        rs.add(role)
        self.edges[y].setdefault(x, set()).add(role.inv())
        for c in list(self.labels[x]):
            if isinstance(c, Forall) and c.role == role:
                self.add_concept(y, c.filler)
        inv = role.inv()
        for c in list(self.labels[y]):
            if isinstance(c, Forall) and c.role == inv:
                self.add_concept(x, c.filler)
        if role in self.prep.functional:
            self.queue.append(("f", x, role))
        if inv in self.prep.functional:
            self.queue.append(("f", y, inv))

    def _process_concept(self, x, c):
        label = self.labels[x]
        if isinstance(c, Bottom):
            self.clash = True
        elif isinstance(c, Name):
            if Not(c) in label:
                self.clash = True
                return
            for d in self.prep.absorbed.get(c, ()):
                self.add_concept(x, d)
        elif isinstance(c, Not):
            if c.arg in label:
                self.clash = True
        elif isinstance(c, And):
            self.add_concept(x, c.left)
            self.add_concept(x, c.right)
        elif isinstance(c, Forall):
            for y in self.neighbours(x, c.role):
                self.add_concept(y, c.filler)

    def _enforce_functional(self, x, role):
        while x in self.labels:
            ns = self.neighbours(x, role)
            if len(ns) < 2:
                return
            keep, gone = ns[0], ns[1]
            self.merge(gone, keep)
            if x == gone:
                x = keep

    def _prune(self, x):
        for y in [y for y, p in self.parent.items() if p == x]:
            self._prune(y)
        self._remove(x)

    def _remove(self, x):
        for w in self.edges.pop(x):
            if w != x and w in self.edges:
                self.edges[w].pop(x, None)
        del self.labels[x]
        self.parent.pop(x, None)

    def merge(self, gone, keep):
        """Merge node ``gone`` into ``keep`` (keep has the lower id)."""
        for child in [y for y, p in self.parent.items() if p == gone and y != keep]:
            self._prune(child)
        moved = [(w, set(rs)) for w, rs in self.edges[gone].items()]
        concepts = list(self.labels[gone])
        self._remove(gone)
        for c in concepts:
            self.add_concept(keep, c)
        for w, rs in moved:
            target = keep if w == gone else w
            for r in sorted(rs, key=str):
                self.add_edge(keep, target, r)

    def saturate(self):
        while self.queue and not self.clash:
            kind, x, item = self.queue.popleft()
            if x not in self.labels:
                continue
            if kind == "c":
                if item in self.labels[x]:
                    self._process_concept(x, item)
            else:
                self._enforce_functional(x, item)

    def _blocked(self, x):
        node = x
        while not self.is_root(node):
            if self._directly_blocked(node):
                return True
            node = self.parent[node]
        return False

    def _directly_blocked(self, x):
        xp = self.parent[x]
        y = xp
        while not self.is_root(y):
            yp = self.parent[y]
            if (self.labels[x] == self.labels[y]
                    and self.labels[xp] == self.labels[yp]
                    and self.edges[xp].get(x) == self.edges[yp].get(y)):
                return True
            y = yp
        return False

    def find_disjunction(self):
        for x in sorted(self.labels):
            label = self.labels[x]
            for c in sorted((c for c in label if isinstance(c, Or)), key=_ckey):
                if c.left not in label and c.right not in label:
                    return x, c
        return None

    def find_exists(self):
        for x in sorted(self.labels):
            label = self.labels[x]
            pending = [c for c in label if isinstance(c, Exists)
                       and not any(c.filler in self.labels[y]
                                   for y in self.neighbours(x, c.role))]
            if pending and not self._blocked(x):
                return x, min(pending, key=_ckey)
        return None

    def apply_exists(self, x, c):
        existing = self.neighbours(x, c.role) if c.role in self.prep.functional else []
        if existing:
            self.add_concept(existing[0], c.filler)
            return
        y = self.new_node(parent=x)
        self.add_concept(y, c.filler)
        self.add_edge(x, y, c.role)


def _tableau(abox: ABox, prep: _Prepared, budget: int) -> bool:
    g = _Graph(prep)
    ids = {}
    for ind in sorted(abox.individuals(), key=term_key):
        ids[ind] = g.new_node()
    for a in sorted(abox.concepts, key=str):
        g.add_concept(ids[a.ind], nnf(a.concept))
    for a in sorted(abox.roles, key=str):
        g.add_edge(ids[a.subj], ids[a.obj], a.role)
    stack = [g]
    steps = 0
    while stack:
        g = stack.pop()
        while True:
            steps += 1
            if steps > budget:
                raise ReasonerUnknown(
                    f"tableau exceeded its budget of {budget} expansion steps")
            g.saturate()
            if g.clash:
                break
            d = g.find_disjunction()
            if d is not None:
                x, c = d
                alt = g.copy()
                alt.add_concept(x, c.right)
                alt.add_concept(x, nnf(Not(c.left)))
                stack.append(alt)
                g.add_concept(x, c.left)
                continue
            e = g.find_exists()
            if e is not None:
                g.apply_exists(*e)
                continue
            return True
    return False


@lru_cache(maxsize=1024)
def _prepare(tbox: TBox) -> _Prepared:
    return _Prepared(tbox)


@lru_cache(maxsize=65536)
def _cached_sat(abox: ABox, tbox: TBox, budget: int) -> bool:
    return _tableau(abox, _prepare(tbox), budget)


def is_satisfiable(abox: ABox, tbox: TBox, budget: int = DEFAULT_BUDGET) -> bool:
    """Whether (abox, tbox) has a model.  No unique name assumption is added."""
    return _cached_sat(abox, tbox, budget)


def _fresh_query_name(a, b, role):
    return Name(f"Q_({a},{b},{role})")


def entails(abox: ABox, tbox: TBox, query, use_una=True, budget: int = DEFAULT_BUDGET) -> bool:
    """Whether (abox, tbox) entails every assertion in ``query``.

    With ``use_una`` the individuals of the ABox and the query are made
    pairwise distinct first.
    """
    query = list(query)
    base = abox
    if use_una:
        base = abox | ABox.of(una(abox.individuals() | assertion_individuals(query)))
    for q in query:
        if isinstance(q, ConceptAssertion):
            extra = ABox.of([ConceptAssertion(q.ind, Not(q.concept))])
        else:
            fresh = _fresh_query_name(q.subj, q.obj, q.role)
            extra = ABox.of([ConceptAssertion(q.subj, Forall(q.role, Not(fresh))),
                             ConceptAssertion(q.obj, fresh)])
        if is_satisfiable(base | extra, tbox, budget):
            return False
    return True


def is_satisfiable_una(abox: ABox, tbox: TBox, budget: int = DEFAULT_BUDGET) -> bool:
    """Satisfiability of the ABox together with its unique name assertions."""
    return is_satisfiable(abox | ABox.of(una(abox.individuals())), tbox, budget)


def clear_cache():
    _cached_sat.cache_clear()
    _prepare.cache_clear()
