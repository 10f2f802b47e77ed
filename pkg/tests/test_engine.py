import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusecalc.corpus import scenario
from fusecalc.engine import (
    Context, Evaluator, compute_possible_models, satisfies, solve, split_closure,
    unsupported_atoms, verify_model,
)
from fusecalc.errors import BudgetExceeded, EvaluationError, StratificationError
from fusecalc.kernel import Atom, Const, Fn, Interpretation, Num, SetVal
from fusecalc.oracle import MAX_DISJUNCTIVE_CLOSURES, ground_oracle
from fusecalc.parser import parse_body, parse_program, parse_rule
from fusecalc.strat import compute_strata

from helpers import load_paths, models_of, program_of
from randprog import random_ec_program, random_ground_program


def atoms(text):
    return Interpretation(a for r in parse_program(text).rules for a in r.head_atoms())


def matchers(interp, body, beta=None, pivot=None):
    return list(solve(Context(interp, pivot), parse_body(body), beta or {}))


# ---------------------------------------------------------------------------
# satisfies

def test_ordinary_literal_matcher():
    (lit,) = parse_body("Q(time, x)")
    got = list(satisfies(Context(atoms("Q(3, A).")), {}, lit))
    assert got == [{"time": Num(3), "x": Const("A")}]


def test_comprehension_takes_latest_earlier_time():
    got = matchers(atoms("P(1, A). P(2, A). P(4, A)."), "P(x < tt, A)", {"tt": Num(3)})
    assert got == [{"tt": Num(3), "x": Num(2)}]


def test_comprehension_later_operators_take_earliest_time():
    interp = atoms("P(1, A). P(2, A). P(4, A). P(6, A).")
    assert matchers(interp, "P(x > tt, A)", {"tt": Num(2)})[0]["x"] == Num(4)
    assert matchers(interp, "P(x >= tt, A)", {"tt": Num(2)})[0]["x"] == Num(2)
    assert matchers(interp, "P(x <= tt, A)", {"tt": Num(2)})[0]["x"] == Num(2)


def test_comprehension_guard_filters_candidates():
    interp = atoms("P(1, A). P(2, A). Ok(1).")
    got = matchers(interp, "P(x < tt, A) STH Ok(x)", {"tt": Num(3)})
    assert [b["x"] for b in got] == [Num(1)]


def test_comprehension_is_per_binding_of_other_arguments():
    interp = atoms("P(1, A). P(2, B). P(0, B).")
    got = matchers(interp, "P(x < tt, y)", {"tt": Num(3)})
    assert {(b["y"], b["x"]) for b in got} == {(Const("A"), Num(1)), (Const("B"), Num(2))}


def test_collect_gathers_a_finite_set():
    interp = atoms(" ".join(f"HoldsAt(50, OnTruck(Box({k})))." for k in range(5)))
    (beta,) = matchers(interp, "COLLECT(boxes, box STH HoldsAt(50, OnTruck(box)))")
    expected = SetVal(frozenset(Fn("Box", (Num(k),)) for k in range(5)))
    assert beta == {"boxes": expected}


def test_collect_of_nothing_is_the_empty_set():
    (beta,) = matchers(Interpretation(), "COLLECT(s, b STH P(b))")
    assert beta == {"s": SetVal(frozenset())}


def test_let_choose_and_maprole():
    (beta,) = matchers(Interpretation(), "LET(y, F(A))")
    assert beta == {"y": Fn("F", (Const("A"),))}
    got = matchers(Interpretation(), "CHOOSE(y, List(Low, High))")
    assert [b["y"] for b in got] == [Const("Low"), Const("High")]
    (beta,) = matchers(Interpretation(), "LET(s, Set(B, A)), MAPROLE(out, s, Temp, High)")
    assert str(beta["out"]) == "Set((A, High) : Temp, (B, High) : Temp)"


def test_negation_is_existential_over_local_variables():
    interp = atoms("P(1). Q(1, A).")
    assert matchers(interp, "P(t), not Q(t, _)") == []
    assert matchers(interp, "P(t), not Q(t, B)") == [{"t": Num(1)}]


def test_unbound_builtin_argument_is_an_evaluation_error():
    with pytest.raises(EvaluationError):
        matchers(atoms("Q(1)."), "Q(x), y != x")


def test_time_comparison_enumerates_interpretation_times():
    got = matchers(atoms("P(1). P(5). Q(3)."), "Q(t), s < t")
    assert got == [{"t": Num(3), "s": Num(1)}]


# ---------------------------------------------------------------------------
# splitting

def test_split_closure_examples():
    (a, c) = Atom("a"), Atom("c")
    assert split_closure(((a,), (c,))) == [[a], [c], [a, c]]
    assert split_closure(((a,),)) == [[a]]
    assert len(split_closure(((a,), (c,), (Atom("d"),)))) == 7


def test_split_closure_applies_the_matcher():
    head = parse_rule("P(x) or Q(x) :- R(x).").head
    assert split_closure(head, {"x": Const("A")})[0] == [Atom("P", (Const("A"),))]


# ---------------------------------------------------------------------------
# possible models

def test_splitting_program():
    assert models_of("a :- b. a or c :- b. b :- not d.") == {
        frozenset({"a", "b"}), frozenset({"a", "b", "c"})}


def test_positive_loop_is_not_self_supporting():
    assert models_of("a :- a. b :- not a.") == {frozenset({"b"})}


def test_empty_program_has_the_empty_model():
    assert models_of("") == {frozenset()}


def test_fail_fact_has_no_models():
    assert models_of("fail.") == set()
    assert ground_oracle(parse_program("fail.")) == []


def test_three_way_disjunction():
    assert len(models_of("a or b or c.")) == 7


def test_fail_rule_prunes_alternatives():
    assert models_of("a or b. fail :- a.") == {frozenset({"b"})}


def test_delayed_disjunction_reaches_later_time():
    got = models_of("P(0). Q(time+1) or R(time+1) :- P(time). S(time) :- Q(time).")
    assert got == {frozenset({"P(0)", "Q(1)", "S(1)"}), frozenset({"P(0)", "R(1)"}),
                   frozenset({"P(0)", "Q(1)", "R(1)", "S(1)"})}


def test_first_model_stops_early():
    program = program_of("a or b.")
    assert compute_possible_models(program, first_only=True) == [frozenset({Atom("a")})]


def test_strong_negation_conflict_closes_branch():
    assert models_of("neg(P(0)). P(0) or Q(0).") == {frozenset({"neg(P(0))", "Q(0)"})}


def test_unstratified_program_is_rejected():
    with pytest.raises(StratificationError):
        compute_possible_models(parse_program("a :- not b. b :- not a."))


def test_budget_names_the_most_produced_predicate():
    program = parse_program("P(0). P(time+1) :- P(time).")
    with pytest.raises(BudgetExceeded) as info:
        compute_possible_models(program, max_steps=50)
    assert info.value.predicate == "P"


def test_oracle_refuses_large_programs():
    text = "\n".join(f"A{i} or B{i}." for i in range(MAX_DISJUNCTIVE_CLOSURES + 1))
    with pytest.raises(EvaluationError):
        ground_oracle(parse_program(text))


def test_oracle_equivalence_on_seeded_programs():
    for seed in range(1000, 1200):
        program = parse_program(random_ground_program(random.Random(seed), timed=seed % 3 == 0))
        assert set(compute_possible_models(program)) == set(ground_oracle(program)), seed


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 9), st.booleans())
def test_oracle_equivalence_property(seed, timed):
    program = parse_program(random_ground_program(random.Random(seed), timed=timed))
    assert set(compute_possible_models(program)) == set(ground_oracle(program))


# ---------------------------------------------------------------------------
# model-level invariants

def _random_programs():
    for seed in range(60):
        yield program_of(random_ground_program(random.Random(seed), timed=seed % 2 == 0))
    for seed in range(30):
        yield program_of(random_ec_program(random.Random(seed)), prelude=True)


def test_models_are_supported_and_verified():
    for program in _random_programs():
        strata = compute_strata(program)
        for model in compute_possible_models(program, strata=strata):
            assert unsupported_atoms(program, model, strata) == []
            assert verify_model(program, model, strata) == []


def test_verifier_detects_broken_models():
    program = program_of("a. b :- a. c :- not b.")
    (model,) = compute_possible_models(program)
    assert verify_model(program, model - {Atom("b")})
    assert unsupported_atoms(program, model | {Atom("z")}) == [Atom("z")]


def _layer_checker(strata):
    problems = []

    def trace(index, rule, beta, layer, new):
        t, s = layer
        for a in new:
            if t is None:
                continue
            at = (a.time, strata.of(a.key) if s != float("inf") else float("inf"))
            if a.time is None or at < (t, s if s is not None else 0):
                problems.append((rule, layer, a))
    return trace, problems


def test_layer_monotonicity_with_audit():
    programs = list(_random_programs())
    for name in ("baseline", "ramification_all", "coldbox"):
        programs.append(load_paths(scenario(name).paths)[0])
    for program in programs:
        strata = compute_strata(program)
        trace, problems = _layer_checker(strata)
        Evaluator(program, strata, trace=trace, audit=True).run()
        assert problems == []


def test_trace_reports_every_fired_closure():
    fired = []
    program = program_of("P(0). Q(time) :- P(time). fail :- Q(time), R(time).")
    Evaluator(program, trace=lambda *args: fired.append(args)).run()
    (index, rule, beta, layer, new) = fired[-1]
    assert str(rule) == "Q(time) :- P(time)."
    assert beta == {"time": Num(0)} and layer[0] == 0 and new == [Atom("Q", (Num(0),))]


def test_engine_is_deterministic():
    program = load_paths(scenario("modified_sensor").paths)[0]
    assert compute_possible_models(program) == compute_possible_models(program)


def test_models_do_not_depend_on_rule_order():
    a = models_of("a or b. c :- a. c :- b.")
    b = models_of("b or a. c :- b. c :- a.")
    assert a == b and len(a) == 3
