import random

from fusecalc.corpus import CORPUS_DIR
from fusecalc.eventcalc import assemble, prelude
from fusecalc.parser import parse_files, parse_program, parse_rule
from fusecalc.rules import Program
from fusecalc.strat import check_sbtp, compute_strata, dlcall_virtual_dependencies

from randprog import random_ground_program


def strata_of(text):
    return compute_strata(parse_program(text)).by_name()


def test_strata_of_the_splitting_example():
    got = strata_of("b :- not d. a :- b. a or c :- b.")
    assert got == {"d": 0, "b": 1, "a": 2, "c": 2}


def test_self_loop_is_one_stratum():
    assert strata_of("p :- p.") == {"p": 0}


def test_disjunctive_heads_share_a_stratum():
    s = strata_of("a or b :- c. b :- not d. d :- e.")
    assert s["a"] == s["b"] > s["d"]


def test_prelude_strata_order():
    program = Program(prelude())
    s = compute_strata(program).by_name()
    for low in ("Happens", "Initiates", "Terminates", "StronglyTerminates",
                "Initiated", "Terminated"):
        assert s[low] < s["HoldsAt"], low
    assert s["HoldsAt"] < s["IsAAt"]
    assert check_sbtp(program) == []


def test_prelude_rule_pivots():
    program = Program(prelude())
    strata = compute_strata(program)
    for rule, info in zip(program.rules, strata.rules):
        assert info.pivot_index is not None, rule.name
        assert str(info.pivot_term) == "time"
    h1 = strata.rules[0]
    assert h1.pivot_index == 0 and h1.delayed


def test_frame_axiom_uses_strict_past_negation_in_same_stratum():
    program = Program(prelude())
    strata = compute_strata(program)
    ec5 = strata.rules[6]
    relations = {str(a): rel for a, _neg, rel, _lit in ec5.body_atoms}
    assert relations["HoldsAt(prev, f)"] == "<"
    assert relations["Terminated(time, f)"] == "<="


def _sbtp(rule_op, rest):
    program = parse_program(f"p(time, x) :- q(time, x), not(r(t, y), t {rule_op} time).\n{rest}")
    return check_sbtp(program, compute_strata(program))


def test_sbtp_le_same_stratum_is_rejected():
    (v,) = _sbtp("<=", "r(time, x) :- p(time, x).")
    assert v.condition == "b"
    assert v.rule_index == 0


def test_sbtp_lt_same_stratum_is_accepted():
    assert _sbtp("<", "r(time, x) :- p(time, x).") == []


def test_sbtp_le_lower_stratum_is_accepted():
    assert _sbtp("<=", "r(time, x) :- s(time, x).") == []


def test_h1_passes_with_delayed_head():
    program = parse_program("Initiated(time+1, f) :- Happens(time, a), Initiates(time, a, f).")
    strata = compute_strata(program)
    assert check_sbtp(program, strata) == []
    assert strata.pivot == {0: (0, strata.rules[0].pivot_term)}


def test_head_earlier_than_pivot_is_rejected():
    program = parse_program("P(time-1) :- Q(time).")
    (v,) = check_sbtp(program)
    assert v.condition == "head-time"


def test_body_later_than_pivot_is_rejected():
    program = parse_program("P(time) :- Q(time), R(time+1).")
    (v,) = check_sbtp(program)
    assert v.condition == "body-time"


def test_missing_pivot_is_rejected():
    program = parse_program("P(time) :- not Q(time), time > 3.")
    violations = check_sbtp(program)
    assert violations and violations[0].condition == "pivot-missing"


def test_leftmost_qualifying_pivot_is_chosen():
    program = parse_program("P(t) :- Q(t), R(s), s < t.")
    strata = compute_strata(program)
    assert strata.rules[0].pivot_index == 0
    assert check_sbtp(program, strata) == []


def test_comprehension_counts_as_negative_context():
    text = "P(time, x) :- Q(time), P(t < time, x) STH R(t)."
    assert check_sbtp(parse_program(text)) == []
    bad = "P(time, x) :- Q(time), P(t <= time, x) STH R(t)."
    assert check_sbtp(parse_program(bad))


def test_collect_guard_counts_as_negative_context():
    text = "P(time, s) :- Q(time), COLLECT(s, b STH P(time, b))."
    violations = check_sbtp(parse_program(text))
    assert [v.condition for v in violations] == ["b"]


def test_dlcall_dependencies_of_implicit_abox_call():
    rule = parse_rule("TempBox(time, box) :- box : Box @ time, "
                      "tbox |= box : Exists(Temp, TempClass).")
    assert dlcall_virtual_dependencies(rule) == [("IsAAt", "+"), ("HasAAt", "+")]


def test_dlcall_dependencies_of_explicit_abox_fail_rule():
    program = parse_files([CORPUS_DIR / "diagnosis.fmp"])
    assert dlcall_virtual_dependencies(program.rules[-1]) == []


def test_dlcall_under_strict_past_negation_is_admissible():
    program = parse_files([CORPUS_DIR / "coldbox.fmp"])
    cold = next(r for r in program.rules if r.head and r.head[0][0].pred == "ColdBox")
    assert dlcall_virtual_dependencies(cold) == [("IsAAt", "-"), ("HasAAt", "-")]
    assert check_sbtp(program) == []


def test_strong_negation_guards_are_exempt():
    program = assemble(parse_program("neg(P(0)). P(0)."))
    assert any(r.origin == "guard" for r in program.rules)
    assert check_sbtp(program) == []


def test_compute_strata_is_deterministic():
    paths = [CORPUS_DIR / f for f in ("transport_kb.fmp", "transport_domain.fmp",
                                       "transport_actions.fmp", "diagnosis.fmp")]
    a = compute_strata(assemble(parse_files(paths)))
    b = compute_strata(assemble(parse_files(paths)))
    assert a.stratum == b.stratum
    assert list(a.stratum) == list(b.stratum)
    assert a.pivot == b.pivot


def test_same_time_dependencies_respect_strata_on_random_programs():
    for seed in range(150):
        program = parse_program(random_ground_program(random.Random(seed), timed=seed % 2 == 0))
        strata = compute_strata(program)
        assert check_sbtp(program, strata) == []
        for rule, info in zip(program.rules, strata.rules):
            if rule.head is None or info.delayed:
                continue
            heads = {strata.of(a.key) for a in rule.head_atoms()}
            assert len(heads) == 1
            (hs,) = heads
            for atom, negative, rel, _lit in info.body_atoms:
                if rel == "<" and not info.untimed:
                    continue
                if negative:
                    assert strata.of(atom.key) < hs
                else:
                    assert strata.of(atom.key) <= hs
