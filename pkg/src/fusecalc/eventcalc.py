"""Event-calculus prelude, Step generation and strong-negation guards."""
from __future__ import annotations

from dataclasses import replace

from .kernel import STEP, Atom, Num, Var
from .parser import parse_program
from .rules import Ordinary, Program, Rule, iter_atoms
from .render import render_rule

_PRELUDE = [
    ("H1", "Initiated(time+1, f) :- Happens(time, a), Initiates(time, a, f)."),
    ("H2", "Terminated(time+1, f) :- Happens(time, a), Terminates(time, a, f)."),
    ("H3", "StronglyTerminated(time+1, f) :- Happens(time, a), StronglyTerminates(time, a, f)."),
    ("H4", "Terminated(time, f) :- StronglyTerminated(time, f)."),
    ("EC3", "HoldsAt(time, f) :- Initiated(time, f), not Terminated(time, f)."),
    ("EC4", "neg(HoldsAt(time, f)) :- StronglyTerminated(time, f), not Initiated(time, f)."),
    ("EC5", "HoldsAt(time, f) :- Step(time, prev), HoldsAt(prev, f), not Terminated(time, f)."),
    ("EC6", "neg(HoldsAt(time, f)) :- Step(time, prev), neg(HoldsAt(prev, f)), "
            "not Initiated(time, f)."),
    ("DL1", "x : c @ time :- HoldsAt(time, x : c)."),
    ("DL2", "x : Neg(c) @ time :- neg(HoldsAt(time, x : c))."),
    ("DL3", "(x, y) : r @ time :- HoldsAt(time, (x, y) : r)."),
]

PRELUDE_NAMES = tuple(name for name, _ in _PRELUDE)


def prelude() -> list:
    """The domain-independent event-calculus rules, named H1 to DL3."""
    out = []
    for name, text in _PRELUDE:
        (rule,) = parse_program(text, source=f"<prelude {name}>").rules
        out.append(replace(rule, name=name, origin="prelude"))
    return out


def render_prelude() -> str:
    return "\n".join(render_rule(r) for r in prelude()) + "\n"


def generate_steps(times) -> list:
    """``Step(t', t)`` facts chaining the sorted time points."""
    ts = sorted(set(times))
    return [Atom(STEP, (Num(b), Num(a))) for a, b in zip(ts, ts[1:])]


def strong_negation_guards(program) -> list:
    """One ``fail :- p(...), neg(p(...))`` rule per predicate used strongly negated."""
    arities = {}
    for rule in program.rules:
        atoms = list(rule.head_atoms()) + [a for a, _n, _l in iter_atoms(rule.body)]
        for a in atoms:
            if a.neg:
                arities.setdefault(a.pred, len(a.args))
    guards = []
    for pred in sorted(arities):
        args = tuple(Var(f"v{i}") for i in range(arities[pred]))
        body = (Ordinary(Atom(pred, args)), Ordinary(Atom(pred, args, neg=True)))
        guards.append(Rule(None, body, name=f"consistency of {pred}", origin="guard"))
    return guards


def step_times(program) -> set:
    """Fact times, successors of event times and the declared horizon."""
    times = set()
    for rule in program.rules:
        if not rule.is_fact:
            continue
        for a in rule.head_atoms():
            t = a.time
            if t is None:
                continue
            times.add(t)
            if a.pred == "Happens" and not a.neg:
                times.add(t + 1)
    times.update(program.directives.get("horizon", ()))
    return times


def assemble(program, prelude_rules=True) -> Program:
    """A new program: prelude, user rules, generated Step facts and guards."""
    rules = []
    if prelude_rules:
        rules.extend(prelude())
    rules.extend(program.rules)
    if prelude_rules:
        for atom in generate_steps(step_times(program)):
            rules.append(Rule(((atom,),), (), name=None, origin="step"))
    out = Program(rules, dict(program.tboxes), dict(program.directives))
    out.rules.extend(strong_negation_guards(out))
    return out
