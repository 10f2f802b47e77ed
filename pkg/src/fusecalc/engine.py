"""Possible-model computation.

Each branch is grown layer by layer: first the untimed rules, then every
time point present in the branch in ascending order.  Within a time point
the strata are saturated in ascending order; a satisfied disjunctive
closure splits the branch into one child per non-empty subset of its
disjuncts.  Fail rules run after the last stratum of a time point and rules
whose heads all lie in the future run after the fail rules.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional

from . import bridge
from .errors import BudgetExceeded, EvaluationError, StratificationError
from .kernel import (
    Interpretation, Num, SetVal, Fn, Var, evaluate_builtin, hasa, is_ground,
    match_args, substitute, substitute_atom, term_vars,
)
from .rules import (
    Builtin, Choose, Collect, Comprehension, DlCall, Let, MapRole, Not, Ordinary,
    TimeCmp, fvar,
)
from .strat import check_sbtp, compute_strata

DEFAULT_MAX_STEPS = 1_000_000
_UNTIMED = float("-inf")
_LAST = float("inf")


# ---------------------------------------------------------------------------
# Body satisfaction

@dataclass
class Context:
    interp: Interpretation
    pivot: Optional[int] = None
    tboxes: dict = field(default_factory=dict)
    use_una: bool = True


def _bind(beta, var, value):
    bound = beta.get(var)
    if bound is None:
        out = dict(beta)
        out[var] = value
        return out
    return beta if bound == value else None


def _ground(term, beta, what):
    v = substitute(term, beta)
    if not is_ground(v):
        raise EvaluationError(f"{what} {v} is not ground when evaluated")
    return v


def _time_candidates(ctx):
    return ctx.interp.times()


def _sat_ordinary(ctx, atom, beta):
    a = substitute_atom(atom, beta)
    t = a.time_term
    if t is not None and isinstance(t, Num):
        candidates = ctx.interp.lookup(a.key, t.value)
    else:
        candidates = ctx.interp.by_key(a.key)
    for g in list(candidates):
        if len(g.args) != len(a.args):
            continue
        ext = match_args(a.args, g.args, beta)
        if ext is not None:
            yield ext


def _sat_comprehension(ctx, lit, beta):
    bound = _ground(lit.bound, beta, "comprehension bound")
    if not isinstance(bound, Num):
        raise EvaluationError(f"comprehension bound {bound} is not a time")
    x = lit.var
    inner = {k: v for k, v in beta.items() if k != x}
    groups = {}
    for ext in _sat_ordinary(ctx, lit.atom, inner):
        tv = ext[x].value
        if not evaluate_builtin(lit.op, [Num(tv), bound]):
            continue
        if lit.guard and next(solve(ctx, lit.guard, ext), None) is None:
            continue
        rest = tuple(sorted(((k, v) for k, v in ext.items() if k != x), key=lambda kv: kv[0]))
        best = groups.get(rest)
        if best is None or (tv > best[0] if lit.op in ("<", "<=") else tv < best[0]):
            groups[rest] = (tv, ext)
    for _rest, (tv, ext) in groups.items():
        out = _bind(beta, x, Num(tv))
        if out is None:
            continue
        for k, v in ext.items():
            if k != x:
                out = _bind(out, k, v)
                if out is None:
                    break
        if out is not None:
            yield out


def _sat_timecmp(ctx, lit, beta):
    left, right = substitute(lit.left, beta), substitute(lit.right, beta)
    free = term_vars(left) | term_vars(right)
    if not free:
        if evaluate_builtin(lit.op, [left, right]):
            yield beta
        return
    if len(free) > 1:
        raise EvaluationError(
            f"time comparison {lit.left} {lit.op} {lit.right} has several unbound variables")
    (name,) = free
    for t in _time_candidates(ctx):
        ext = dict(beta)
        ext[name] = Num(t)
        if evaluate_builtin(lit.op, [substitute(left, ext), substitute(right, ext)]):
            yield ext


def _choices(value):
    if isinstance(value, SetVal):
        return value.sorted_items()
    if isinstance(value, Fn) and value.name == "List":
        return list(value.args)
    raise EvaluationError(f"CHOOSE needs a set or a list, got {value}")


def _collect(ctx, lit, beta):
    values = set()
    for gamma in solve(ctx, lit.guard, beta):
        v = substitute(lit.template, gamma)
        if not is_ground(v):
            raise EvaluationError(f"COLLECT template {lit.template} is not ground in {v}")
        values.add(v)
    return SetVal(frozenset(values))


def _maprole(lit, beta):
    items = _ground(lit.items, beta, "MAPROLE set")
    role = _ground(lit.role, beta, "MAPROLE role")
    filler = _ground(lit.filler, beta, "MAPROLE filler")
    return SetVal(frozenset(hasa(x, role, filler) for x in _choices(items)))


def satisfies(ctx: Context, beta: dict, lit):
    """All extensions of ``beta`` under which ``lit`` holds, in evaluation order."""
    if isinstance(lit, Ordinary):
        yield from _sat_ordinary(ctx, lit.atom, beta)
    elif isinstance(lit, Comprehension):
        yield from _sat_comprehension(ctx, lit, beta)
    elif isinstance(lit, Builtin):
        args = [_ground(a, beta, f"argument of built-in {lit.op}") for a in lit.args]
        if evaluate_builtin(lit.op, args):
            yield beta
    elif isinstance(lit, TimeCmp):
        yield from _sat_timecmp(ctx, lit, beta)
    elif isinstance(lit, Let):
        out = _bind(beta, lit.var, _ground(lit.term, beta, "LET value"))
        if out is not None:
            yield out
    elif isinstance(lit, Choose):
        for v in _choices(_ground(lit.terms, beta, "CHOOSE collection")):
            out = _bind(beta, lit.var, v)
            if out is not None:
                yield out
    elif isinstance(lit, Collect):
        out = _bind(beta, lit.var, _collect(ctx, lit, beta))
        if out is not None:
            yield out
    elif isinstance(lit, MapRole):
        out = _bind(beta, lit.var, _maprole(lit, beta))
        if out is not None:
            yield out
    elif isinstance(lit, DlCall):
        yield from bridge.eval_dl_call(ctx.interp, beta, ctx.pivot, lit, ctx.tboxes,
                                       ctx.use_una)
    elif isinstance(lit, Not):
        if next(solve(ctx, lit.body, beta), None) is None:
            yield beta
    else:
        raise TypeError(f"not a body literal: {lit!r}")


def solve(ctx: Context, body, beta=None):
    """Body matchers of ``body`` extending ``beta``, left to right."""
    beta = {} if beta is None else beta

    def rec(i, b):
        if i == len(body):
            yield b
            return
        for ext in satisfies(ctx, b, body[i]):
            yield from rec(i + 1, ext)

    yield from rec(0, beta)


def _restrict(beta, names):
    return {k: v for k, v in beta.items() if k in names}


def _closure_key(index, beta):
    return index, tuple(sorted(beta.items(), key=lambda kv: kv[0]))


# ---------------------------------------------------------------------------
# Splitting

def split_closure(head, beta=None):
    """Alternatives for a disjunctive head: one atom list per non-empty subset.

    Ordered by subset size, then by disjunct position.
    """
    beta = beta or {}
    disjuncts = [[substitute_atom(a, beta) for a in d] for d in head]
    out = []
    for size in range(1, len(disjuncts) + 1):
        for combo in combinations(range(len(disjuncts)), size):
            atoms = []
            for i in combo:
                for a in disjuncts[i]:
                    if a not in atoms:
                        atoms.append(a)
            out.append(atoms)
    return out


# ---------------------------------------------------------------------------
# The evaluator

@dataclass
class _RulePlan:
    index: int
    rule: object
    kind: str  # 'normal', 'disj', 'fail', 'delayed'
    untimed: bool
    pivot_var: Optional[str]
    pivot_num: Optional[int]
    stratum: Optional[int]
    fvars: frozenset

    def start(self, t):
        """Initial matcher for time ``t``, or None when the rule cannot apply at t."""
        if self.untimed:
            return {}
        if self.pivot_num is not None:
            return {} if self.pivot_num == t else None
        return {self.pivot_var: Num(t)}


@dataclass
class _Branch:
    interp: Interpretation
    done: set
    time: float
    stage: int  # index into the stratum list, then fail, then delayed
    fired: list


class Evaluator:
    def __init__(self, program, strata=None, max_steps=DEFAULT_MAX_STEPS,
                 trace: Optional[Callable] = None, audit=False, use_una=True):
        if max_steps <= 0:
            raise ValueError("max_steps must be positive")
        self.program = program
        self.strata = strata or compute_strata(program)
        violations = check_sbtp(program, self.strata)
        if violations:
            raise StratificationError(violations)
        self.max_steps = max_steps
        self.trace = trace
        self.audit = audit
        self.use_una = use_una
        self.steps = 0
        self.produced = Counter()
        self.facts = []
        self.disj_facts = []
        self.plans = []
        for idx, rule in enumerate(program.rules):
            info = self.strata.rules[idx]
            if rule.is_fact and not rule.is_disjunctive:
                self.facts.extend(rule.head_atoms())
                continue
            if rule.is_fact:
                times = [a.time for a in rule.head_atoms() if a.time is not None]
                t = min(times) if times else _UNTIMED
                self.disj_facts.append((idx, rule, t, self.strata.of(rule.head[0][0].key)))
                continue
            if rule.is_fail:
                kind = "fail"
            elif info.delayed:
                kind = "delayed"
            else:
                kind = "disj" if rule.is_disjunctive else "normal"
            pivot = info.pivot_term
            self.plans.append(_RulePlan(
                idx, rule, kind, info.untimed,
                pivot.name if isinstance(pivot, Var) else None,
                pivot.value if isinstance(pivot, Num) else None,
                info.head_stratum, frozenset(fvar(rule.body))))
        self.stratum_list = sorted({p.stratum for p in self.plans
                                    if p.kind in ("normal", "disj")}
                                   | {s for _i, _r, _t, s in self.disj_facts})
        self.by_stratum = {s: [p for p in self.plans if p.stratum == s
                               and p.kind in ("normal", "disj")]
                           for s in self.stratum_list}
        self.fail_plans = [p for p in self.plans if p.kind == "fail"]
        self.delayed_plans = [p for p in self.plans if p.kind == "delayed"]

    # -- helpers ---------------------------------------------------------

    def _ctx(self, interp, t):
        return Context(interp, None if t == _UNTIMED else int(t), self.program.tboxes,
                       self.use_una)

    def _applies(self, plan, t):
        return plan.untimed == (t == _UNTIMED)

    def _matchers(self, plan, interp, t):
        if not self._applies(plan, t):
            return []
        beta0 = plan.start(None if t == _UNTIMED else int(t))
        if beta0 is None:
            return []
        try:
            return [_restrict(b, plan.fvars) for b in
                    solve(self._ctx(interp, t), plan.rule.body, beta0)]
        except EvaluationError as e:
            where = plan.rule.name or f"rule {plan.index}"
            raise EvaluationError(f"{where}: {e}") from None

    def _count(self, atoms):
        for a in atoms:
            self.produced[a.pred] += 1
        self.steps += 1
        if self.steps > self.max_steps:
            pred = self.produced.most_common(1)[0][0] if self.produced else "(none)"
            raise BudgetExceeded(self.max_steps, pred)

    def _layer_ok(self, atom, t, s):
        at = _UNTIMED if atom.time is None else atom.time
        return (at, self.strata.of(atom.key)) >= (t, s)

    def _add(self, branch, index, beta, atoms, t, s):
        new = [a for a in atoms if a not in branch.interp]
        if not new:
            return False
        if self.audit:
            for a in new:
                if not self._layer_ok(a, t, s):
                    raise AssertionError(
                        f"layer violation: {a} added while evaluating layer {(t, s)}")
            branch.fired.append((index, beta, None if t == _UNTIMED else int(t)))
        self._count(new)
        for a in new:
            branch.interp.add(a)
        if self.trace is not None:
            self.trace(index, self.program.rules[index], beta,
                       (None if t == _UNTIMED else int(t), s), new)
        return True

    def _saturate(self, branch, t, s):
        plans = [p for p in self.by_stratum[s] if p.kind == "normal"]
        changed = True
        while changed:
            changed = False
            for plan in plans:
                for beta in self._matchers(plan, branch.interp, t):
                    atoms = [substitute_atom(a, beta) for a in plan.rule.head[0]]
                    if self._add(branch, plan.index, beta, atoms, t, s):
                        changed = True

    def _split(self, branch, index, beta, head, t, s):
        """Children of a branch for a fired disjunctive closure."""
        seen = set()
        children = []
        for alt in split_closure(head, beta):
            new = frozenset(a for a in alt if a not in branch.interp)
            if new in seen:
                continue
            seen.add(new)
            child = _Branch(branch.interp.copy(), set(branch.done), branch.time,
                            branch.stage, list(branch.fired))
            self._add(child, index, beta, alt, t, s)
            children.append(child)
        return children

    def _pending_disjunction(self, branch, plans_and_facts, t):
        for entry in plans_and_facts:
            if isinstance(entry, _RulePlan):
                for beta in self._matchers(entry, branch.interp, t):
                    key = _closure_key(entry.index, beta)
                    if key not in branch.done:
                        return key, entry.index, beta, entry.rule.head
            else:
                idx, rule, _ft, _s = entry
                key = (idx, ())
                if key not in branch.done:
                    return key, idx, {}, rule.head
        return None

    def _fails(self, branch, t):
        for plan in self.fail_plans:
            if self._matchers(plan, branch.interp, t):
                if self.trace is not None:
                    self.trace(plan.index, plan.rule, None,
                               (None if t == _UNTIMED else int(t), None), [])
                return True
        return False

    def _next_time(self, branch):
        later = [x for x in branch.interp.times() if x > branch.time]
        later += [ft for _i, _r, ft, _s in self.disj_facts if ft > branch.time]
        return min(later) if later else None

    # -- branch driver ---------------------------------------------------

    def _advance(self, branch):
        """Run a branch until it splits (children), closes ([]) or completes (None)."""
        nstrata = len(self.stratum_list)
        while True:
            t = branch.time
            if branch.stage < nstrata:
                s = self.stratum_list[branch.stage]
                self._saturate(branch, t, s)
                disj = [p for p in self.by_stratum[s] if p.kind == "disj"]
                facts = [f for f in self.disj_facts if f[2] == t and f[3] == s]
                found = self._pending_disjunction(branch, disj + facts, t)
                if found is not None:
                    key, index, beta, head = found
                    branch.done.add(key)
                    return self._split(branch, index, beta, head, t, s)
                branch.stage += 1
            elif branch.stage == nstrata:
                if self._fails(branch, t):
                    return []
                branch.stage += 1
            elif branch.stage == nstrata + 1:
                for plan in self.delayed_plans:
                    if plan.rule.is_disjunctive:
                        continue
                    for beta in self._matchers(plan, branch.interp, t):
                        atoms = [substitute_atom(a, beta) for a in plan.rule.head[0]]
                        self._add(branch, plan.index, beta, atoms, t, _LAST)
                delayed_disj = [p for p in self.delayed_plans if p.rule.is_disjunctive]
                found = self._pending_disjunction(branch, delayed_disj, t)
                if found is not None:
                    key, index, beta, head = found
                    branch.done.add(key)
                    return self._split(branch, index, beta, head, t, _LAST)
                branch.stage += 1
            else:
                nxt = self._next_time(branch)
                if nxt is None:
                    return None
                branch.time = nxt
                branch.stage = 0

    def run(self, first_only=False):
        """All possible models (as frozensets), in discovery order."""
        root = _Branch(Interpretation(self.facts), set(), _UNTIMED, 0, [])
        stack = [root]
        models, seen = [], set()
        while stack:
            branch = stack.pop()
            result = self._advance(branch)
            if result is None:
                model = branch.interp.frozen()
                if self.audit:
                    self._audit_final(branch)
                if model not in seen:
                    seen.add(model)
                    models.append(model)
                    if first_only:
                        break
            else:
                stack.extend(reversed(result))
        return models

    def _audit_final(self, branch):
        for index, beta, t in branch.fired:
            rule = self.program.rules[index]
            ctx = self._ctx(branch.interp, _UNTIMED if t is None else t)
            if next(solve(ctx, rule.body, beta), None) is None:
                raise AssertionError(
                    f"closure of {rule.name or index} with {beta} no longer holds in the final model")


def compute_possible_models(program, max_steps=DEFAULT_MAX_STEPS, first_only=False,
                            trace=None, audit=False, use_una=True, strata=None):
    """The possible models of an SBTP program, as a list of frozensets of atoms."""
    ev = Evaluator(program, strata, max_steps, trace, audit, use_una)
    return ev.run(first_only)


# ---------------------------------------------------------------------------
# Post-hoc checks on finished models

def _closures(program, model, strata, use_una=True):
    """Yield (index, rule, beta) for every closure whose body the model satisfies."""
    interp = model if isinstance(model, Interpretation) else Interpretation(
        sorted(model, key=lambda a: (a.pred, str(a))))
    for idx, rule in enumerate(program.rules):
        info = strata.rules[idx]
        names = frozenset(fvar(rule.body))
        if not rule.body:
            yield idx, rule, {}
            continue
        if info.untimed or info.pivot_term is None:
            starts = [(None, {})]
        elif isinstance(info.pivot_term, Num):
            starts = [(info.pivot_term.value, {})]
        else:
            starts = [(t, {info.pivot_term.name: Num(t)}) for t in interp.times()]
        for t, beta0 in starts:
            ctx = Context(interp, t, program.tboxes, use_una)
            seen = set()
            for beta in solve(ctx, rule.body, beta0):
                beta = _restrict(beta, names)
                key = _closure_key(idx, beta)
                if key not in seen:
                    seen.add(key)
                    yield idx, rule, beta


def verify_model(program, model, strata=None, use_una=True) -> list:
    """Closures the model violates: a satisfied fail body or no head disjunct true."""
    strata = strata or compute_strata(program)
    model = frozenset(model)
    problems = []
    for idx, rule, beta in _closures(program, model, strata, use_una):
        if rule.head is None:
            problems.append(f"fail rule {rule.name or idx} fires with {beta}")
        elif not any(all(substitute_atom(a, beta) in model for a in d) for d in rule.head):
            problems.append(f"closure of {rule.name or idx} with {beta} is not satisfied")
    return problems


def unsupported_atoms(program, model, strata=None, use_una=True) -> list:
    """Atoms of the model that are no head atom of a closure satisfied by the model."""
    strata = strata or compute_strata(program)
    model = frozenset(model)
    supported = set()
    for _idx, rule, beta in _closures(program, model, strata, use_una):
        if rule.head is not None:
            for a in rule.head_atoms():
                supported.add(substitute_atom(a, beta))
    return sorted((a for a in model if a not in supported), key=str)
