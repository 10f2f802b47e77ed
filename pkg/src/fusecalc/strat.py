"""Call graph, strata and the stratification-by-time-and-predicates check.

Every timed rule has a pivot: the leftmost positive ordinary body literal
whose time term is a variable or a number and with respect to which all
head times are later-or-equal and all body times earlier-or-equal.  Upper
bounds of body time terms relative to the pivot are derived from the time
comparisons in scope and from ``Step(t, p)`` atoms (which imply ``p < t``).

Call-graph edges are only drawn where a body atom can have the same time as
a head atom: atoms that are provably strictly earlier than the head cannot
be affected by evaluating the head's layer, so they impose no stratum
order.  This is what lets the event calculus frame axioms refer to the
previous time step from within the same stratum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .kernel import HASAAT, ISAAT, STEP, Atom, Num, Plus, Var, key_name
from .rules import (
    AboxAt, Collect, Comprehension, DlCall, Not, Ordinary, TimeCmp,
)

_CONST = "#const"


@dataclass(frozen=True)
class Violation:
    rule_index: int
    rule: object
    literal: object
    condition: str  # 'a', 'b', 'pivot-missing', 'head-time', 'body-time'
    message: str

    def __str__(self):
        where = self.rule.name or f"rule {self.rule_index}"
        return f"{where} [{self.condition}] {self.message}: {self.rule}"


@dataclass
class RuleInfo:
    index: int
    pivot_index: Optional[int]
    pivot_term: object
    untimed: bool
    delayed: bool
    head_stratum: Optional[int] = None
    # (atom, negative, relation, literal) for every body atom incl. DL virtual atoms
    body_atoms: list = field(default_factory=list)
    head_ok: bool = True


@dataclass
class StratumMap:
    stratum: dict  # predicate key (pred, neg) -> int
    rules: list  # RuleInfo per rule index
    graph: object = None

    @property
    def pivot(self):
        return {r.index: (r.pivot_index, r.pivot_term) for r in self.rules
                if r.pivot_index is not None}

    def of(self, key):
        return self.stratum.get(key, 0)

    def by_name(self):
        """Strata keyed by display name (``neg P`` for strongly negated P)."""
        return {key_name(k): s for k, s in self.stratum.items()}

    def explain(self, program) -> str:
        lines = ["strata:"]
        groups = {}
        for key, s in self.stratum.items():
            groups.setdefault(s, []).append(key_name(key))
        for s in sorted(groups):
            lines.append(f"  {s}: {', '.join(sorted(groups[s]))}")
        lines.append("rules:")
        for info in self.rules:
            rule = program.rules[info.index]
            if info.pivot_index is not None:
                lit = rule.body[info.pivot_index]
                piv = f"pivot {info.pivot_term} in literal {info.pivot_index + 1} ({lit.atom})"
            elif info.untimed:
                piv = "untimed"
            else:
                piv = "fact" if rule.is_fact else "no pivot"
            extra = " delayed" if info.delayed else ""
            hs = "" if info.head_stratum is None else f" stratum {info.head_stratum}"
            lines.append(f"  {rule.name or info.index}: {piv}{hs}{extra}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Time bounds

def _linear(t):
    """(base, offset) for a time term, base None when unsupported."""
    if isinstance(t, Var):
        return t.name, 0
    if isinstance(t, Plus) and isinstance(t.base, Var):
        return t.base.name, t.offset
    if isinstance(t, Num):
        return _CONST, t.value
    return None, 0


def _scope_constraints(body):
    """Constraints ``a + x <= b + y - strict`` from a positive body level."""
    out = []
    for lit in body:
        if isinstance(lit, TimeCmp):
            l, r = _linear(lit.left), _linear(lit.right)
            op = lit.op
            if op in (">", ">="):
                l, r, op = r, l, "<" if op == ">" else "<="
            if l[0] is not None and r[0] is not None:
                out.append((l, r, 1 if op == "<" else 0))
        elif isinstance(lit, Ordinary) and lit.atom.pred == STEP and len(lit.atom.args) == 2:
            t, p = (_linear(a) for a in lit.atom.args)
            if t[0] is not None and p[0] is not None:
                out.append((p, t, 1))
        elif isinstance(lit, Comprehension):
            x = (lit.var, 0)
            b = _linear(lit.bound)
            if b[0] is not None:
                if lit.op in ("<", "<="):
                    out.append((x, b, 1 if lit.op == "<" else 0))
                else:
                    out.append((b, x, 1 if lit.op == ">" else 0))
    return out


def _upper_bounds(constraints, pivot):
    """dist[v] = c such that v <= pivot + c is implied, for every bounded v."""
    pb, po = pivot
    dist = {pb: -po}
    n = len({c[0][0] for c in constraints} | {c[1][0] for c in constraints}) + 2
    for _ in range(n):
        changed = False
        for (lb, lo), (rb, ro), strict in constraints:
            if rb in dist:
                cand = dist[rb] + ro - lo - strict
                if lb not in dist or cand < dist[lb]:
                    dist[lb] = cand
                    changed = True
        if not changed:
            break
    return dist


def _relation(t, dist):
    """'<', '<=', '>' or '?' for a time term against the pivot."""
    base, off = _linear(t)
    if base is None or base not in dist:
        return "?"
    c = dist[base] + off
    if c < 0:
        return "<"
    if c == 0:
        return "<="
    return ">"


def _head_relation(t, pivot):
    """'=', '>' or '?' for a head time term against the pivot."""
    base, off = _linear(t)
    pb, po = pivot
    if base is None or base != pb:
        return "?"
    if off == po:
        return "="
    return ">" if off > po else "<"


def _virtual_atoms(call, pivot_term):
    if call.abox is None:
        t = pivot_term if pivot_term is not None else Var("#pivot")
        return [Atom(ISAAT, (Var("_"), Var("_"), t)), Atom(HASAAT, (Var("_"), Var("_"), Var("_"), t))]
    out = []
    for part in call.abox:
        if isinstance(part, AboxAt):
            out.append(Atom(ISAAT, (Var("_"), Var("_"), part.time)))
            out.append(Atom(HASAAT, (Var("_"), Var("_"), Var("_"), part.time)))
    return out


def _body_atoms(body, pivot_term, outer, negative):
    """Yield (atom, negative, constraints-in-scope, literal) recursively."""
    scope = outer + _scope_constraints(body)
    for lit in body:
        if isinstance(lit, Ordinary):
            yield lit.atom, negative, scope, lit
        elif isinstance(lit, Comprehension):
            inner = scope + _scope_constraints(lit.guard)
            yield lit.atom, True, inner, lit
            yield from _body_atoms(lit.guard, pivot_term, scope, True)
        elif isinstance(lit, Collect):
            yield from _body_atoms(lit.guard, pivot_term, scope, True)
        elif isinstance(lit, Not):
            yield from _body_atoms(lit.body, pivot_term, scope, True)
        elif isinstance(lit, DlCall):
            for a in _virtual_atoms(lit, pivot_term):
                yield a, negative, scope, lit


def _pivot_candidates(rule):
    for i, lit in enumerate(rule.body):
        if isinstance(lit, Ordinary):
            t = lit.atom.time_term
            if isinstance(t, (Var, Num)):
                yield i, t


def _analyze(rule, index):
    """Pivot choice and time relations for one rule, plus local violations."""
    timed_atoms = [a for a in rule.head_atoms() if a.time_term is not None]
    all_body = list(_body_atoms(rule.body, None, [], False))
    uses_implicit_abox = any(isinstance(lit, DlCall) and lit.abox is None
                             for _a, _n, _s, lit in all_body)
    body_timed = any(a.time_term is not None for a, _n, _s, lit in all_body
                     if not isinstance(lit, DlCall))
    any_aboxat = any(isinstance(lit, DlCall) and lit.abox is not None
                     and any(isinstance(p, AboxAt) for p in lit.abox)
                     for _a, _n, _s, lit in all_body)

    if not rule.body:
        return RuleInfo(index, None, None, untimed=not timed_atoms, delayed=False), []
    if not timed_atoms and not body_timed and not uses_implicit_abox and not any_aboxat:
        info = RuleInfo(index, None, None, untimed=True, delayed=False)
        info.body_atoms = [(a, neg, "<=", lit) for a, neg, _s, lit in all_body]
        return info, []

    best = None
    for i, t in _pivot_candidates(rule):
        info, violations = _with_pivot(rule, index, i, t)
        if not violations:
            return info, []
        if best is None:
            best = (info, violations)
    if best is not None:
        return best
    info = RuleInfo(index, None, None, untimed=False, delayed=False)
    return info, [Violation(index, rule, None, "pivot-missing",
                            "no positive ordinary body literal with a variable or "
                            "numeric time can serve as pivot")]


def _with_pivot(rule, index, i, pivot_term):
    pivot = _linear(pivot_term)
    violations = []
    rels = []
    for a in rule.head_atoms():
        t = a.time_term
        rel = "?" if t is None else _head_relation(t, pivot)
        rels.append(rel)
        if rel not in ("=", ">"):
            violations.append(Violation(
                index, rule, a, "head-time",
                f"head time of {a} is not syntactically at or after pivot {pivot_term}"))
    delayed = bool(rels) and all(r == ">" for r in rels)
    info = RuleInfo(index, i, pivot_term, untimed=False, delayed=delayed)
    for atom, negative, scope, lit in _body_atoms(rule.body, pivot_term, [], False):
        t = atom.time_term
        if t is None:
            rel = "<"  # untimed atoms are settled before any time point
        else:
            rel = _relation(t, _upper_bounds(scope, pivot))
        info.body_atoms.append((atom, negative, rel, lit))
        if rel in (">", "?"):
            violations.append(Violation(
                index, rule, lit, "body-time",
                f"time of {atom} is not syntactically at or before pivot {pivot_term}"))
    return info, violations


def _same_time_edges(rule, info):
    """Body keys that can share a time with the head: (key, negative)."""
    if rule.head is None or info.delayed:
        return []
    return [(a.key, neg) for a, neg, rel, _lit in info.body_atoms if rel == "<="
            or info.untimed]


def _build(program):
    infos, local = [], []
    for idx, rule in enumerate(program.rules):
        info, v = _analyze(rule, idx)
        infos.append(info)
        local.append(v)
    return infos, local


def compute_strata(program) -> StratumMap:
    """Assign every predicate key a stratum: SCCs of the same-time call graph in topological order."""
    infos, _ = _build(program)
    g = nx.DiGraph()
    delayed_edges = []
    for rule, info in zip(program.rules, infos):
        keys = [a.key for a in rule.head_atoms()]
        for a, _neg, _rel, _lit in info.body_atoms:
            g.add_node(a.key)
        for k in keys:
            g.add_node(k)
        for k1 in keys:
            for k2 in keys:
                if k1 != k2:
                    g.add_edge(k1, k2)
        same = _same_time_edges(rule, info)
        for body_key, _neg in same:
            for k in keys:
                g.add_edge(body_key, k)
        if rule.head is not None and not same:
            for a, _neg, _rel, _lit in info.body_atoms:
                for k in keys:
                    delayed_edges.append((a.key, k))
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    dag = nx.DiGraph(cond)
    for u, v in sorted(set(delayed_edges), key=lambda e: (key_name(e[0]), key_name(e[1]))):
        cu, cv = members[u], members[v]
        if cu != cv and not dag.has_edge(cu, cv) and not nx.has_path(dag, cv, cu):
            dag.add_edge(cu, cv)
    names = {c: min(key_name(k) for k in cond.nodes[c]["members"]) for c in cond.nodes}
    order = list(nx.lexicographical_topological_sort(dag, key=lambda c: names[c]))
    comp_stratum = {c: i for i, c in enumerate(order)}
    stratum = {}
    for key in sorted(g.nodes, key=key_name):
        stratum[key] = comp_stratum[members[key]]
    for rule, info in zip(program.rules, infos):
        if rule.head is not None:
            info.head_stratum = stratum[rule.head[0][0].key]
    return StratumMap(stratum, infos, g)


def check_sbtp(program, strata: StratumMap = None) -> list:
    """All SBTP violations of a program (empty when it is stratified)."""
    if strata is None:
        strata = compute_strata(program)
    _, local = _build(program)
    violations = []
    for idx, rule in enumerate(program.rules):
        if rule.origin == "guard" or rule.is_fact:
            continue
        violations.extend(local[idx])
        if local[idx]:
            continue
        info = strata.rules[idx]
        if rule.head is None or info.delayed:
            continue  # evaluated after every stratum of the pivot time
        hs = info.head_stratum
        for atom, negative, rel, lit in info.body_atoms:
            if not negative or (rel == "<" and not info.untimed):
                continue
            if strata.of(atom.key) >= hs:
                cond = "b"
                violations.append(Violation(
                    idx, rule, lit, cond,
                    f"{key_name(atom.key)} is used negatively without being strictly "
                    f"earlier than the pivot, so it must be in a strictly lower "
                    f"stratum than the head"))
    return violations


def dlcall_virtual_dependencies(rule) -> list:
    """(predicate, polarity) pairs a rule's DL-calls add to the call graph."""
    if rule.head is None:
        return []
    out = []

    def walk(body, negative):
        for lit in body:
            if isinstance(lit, DlCall):
                for a in _virtual_atoms(lit, None):
                    out.append((a.pred, "-" if negative else "+"))
            elif isinstance(lit, Not):
                walk(lit.body, True)
            elif isinstance(lit, (Collect, Comprehension)):
                walk(lit.guard, True)

    walk(rule.body, False)
    return out
