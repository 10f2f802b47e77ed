"""Brute-force possible models of small ground programs, for cross-checking the engine.

Every split selection is enumerated explicitly and the perfect model of each
resulting Horn program is built with a textbook stratification by atoms and
a naive least fixpoint per stratum.  Nothing here is shared with the engine.
"""
from __future__ import annotations

from itertools import combinations, product

from .errors import EvaluationError, StaticError
from .rules import Not, Ordinary

MAX_DISJUNCTIVE_CLOSURES = 20


def _check_ground(rule):
    for lit in rule.body:
        inner = lit.body if isinstance(lit, Not) else (lit,)
        for x in inner:
            if not isinstance(x, Ordinary):
                raise StaticError(f"oracle handles ordinary atoms only: {rule}")
            if any(not _is_ground_term(t) for t in x.atom.args):
                raise StaticError(f"oracle needs a ground program: {rule}")
    for a in rule.head_atoms():
        if any(not _is_ground_term(t) for t in a.args):
            raise StaticError(f"oracle needs a ground program: {rule}")


def _is_ground_term(t):
    from .kernel import is_ground
    return is_ground(t)


def _split_rule(rule):
    """Body as (positive atoms, negative conjunctions)."""
    pos, neg = [], []
    for lit in rule.body:
        if isinstance(lit, Not):
            neg.append(tuple(x.atom for x in lit.body))
        else:
            pos.append(lit.atom)
    return pos, neg


def _subsets(n):
    return [c for k in range(1, n + 1) for c in combinations(range(n), k)]


def _levels(horn):
    """Stratum per atom: positive edges keep the level, negative edges raise it."""
    atoms = set()
    for heads, pos, neg in horn:
        atoms.update(heads)
        atoms.update(pos)
        for conj in neg:
            atoms.update(conj)
    level = {a: 0 for a in atoms}
    for _ in range(len(atoms) + 2):
        changed = False
        for heads, pos, neg in horn:
            need = max([level[a] for a in pos] + [level[a] + 1 for c in neg for a in c] + [0])
            for h in heads:
                if level[h] < need:
                    level[h] = need
                    changed = True
            top = max(level[h] for h in heads)
            for h in heads:
                if level[h] < top:
                    level[h] = top
                    changed = True
        if not changed:
            return level
    raise StaticError("program is not stratified")


def _body_true(model, pos, neg):
    return all(a in model for a in pos) and not any(all(a in model for a in c) for c in neg)


def perfect_model(horn):
    """Perfect model of ground Horn rules given as (head atoms, positive, negative conjunctions)."""
    level = _levels(horn)
    model = set()
    for s in sorted(set(level.values())):
        rules = [r for r in horn if level[r[0][0]] == s]
        changed = True
        while changed:
            changed = False
            for heads, pos, neg in rules:
                if _body_true(model, pos, neg):
                    for h in heads:
                        if h not in model:
                            model.add(h)
                            changed = True
    return frozenset(model)


def ground_oracle(program) -> list:
    """All possible models of a ground ordinary program, as a list of frozensets."""
    normal, disjunctive, fails = [], [], []
    for rule in program.rules:
        _check_ground(rule)
        pos, neg = _split_rule(rule)
        if rule.head is None:
            fails.append((pos, neg))
        elif len(rule.head) == 1:
            normal.append((tuple(rule.head[0]), pos, neg))
        else:
            disjunctive.append((rule.head, pos, neg))
    if len(disjunctive) > MAX_DISJUNCTIVE_CLOSURES:
        raise EvaluationError(
            f"oracle refuses {len(disjunctive)} disjunctive closures "
            f"(limit {MAX_DISJUNCTIVE_CLOSURES})")
    choices = [_subsets(len(head)) for head, _p, _n in disjunctive]
    models = []
    seen = set()
    for selection in product(*choices):
        horn = list(normal)
        for (head, pos, neg), subset in zip(disjunctive, selection):
            for i in subset:
                horn.append((tuple(head[i]), pos, neg))
        model = perfect_model(horn)
        if any(_body_true(model, pos, neg) for pos, neg in fails):
            continue
        if model not in seen:
            seen.add(model)
            models.append(model)
    return models
