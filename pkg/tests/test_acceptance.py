"""Acceptance criteria 1 to 11, each timed and reported as one pass/fail line."""
import random

from fusecalc import dl
from fusecalc.corpus import scenario
from fusecalc.engine import compute_possible_models
from fusecalc.errors import StratificationError
from fusecalc.kernel import Atom, Const, Fn, Num, SetVal, hasa
from fusecalc.oracle import ground_oracle
from fusecalc.parser import parse_program
from fusecalc.strat import check_sbtp, compute_strata

from helpers import criterion, load_paths, models_of, program_of
from invariants import all_violations
from randprog import random_ec_program, random_ground_program


def box(i):
    return Fn("Box", (Num(i),))


def _models(name):
    program, strata = load_paths(scenario(name).paths)
    return compute_possible_models(program, strata=strata)


def test_criterion_01_possible_model_splitting():
    with criterion(1, "splitting yields exactly {a,b} and {a,b,c}", limit=1):
        got = models_of("a :- b. a or c :- b. b :- not d.")
        assert got == {frozenset({"a", "b"}), frozenset({"a", "b", "c"})}


def test_criterion_02_corrected_semantics():
    with criterion(2, "a :- a. b :- not a. yields exactly {b}", limit=1):
        got = models_of("a :- a. b :- not a.")
        assert got == {frozenset({"b"})}
        assert frozenset({"a"}) not in got


def test_criterion_03_oracle_equivalence():
    with criterion(3, "engine equals brute-force oracle on 240 random ground programs", limit=60):
        nontrivial = 0
        for seed in range(240):
            text = random_ground_program(random.Random(seed), timed=seed % 2 == 1)
            program = parse_program(text)
            engine = set(compute_possible_models(program))
            oracle = set(ground_oracle(program))
            assert engine == oracle, f"seed {seed}:\n{text}"
            nontrivial += len(oracle) > 1
        assert nontrivial >= 20


def test_criterion_04_sbtp_examples():
    with criterion(4, "t <= time rejected, t < time accepted", limit=1):
        rule = "p(time, x) :- q(time, x), not(r(t, y), t {op} time).\n"
        same_stratum = "r(time, x) :- p(time, x).\nq(0, A).\n"
        lower_stratum = "r(time, x) :- q(time, x).\nq(0, A).\n"

        def violations(op, rest):
            program = parse_program(rule.format(op=op) + rest)
            return check_sbtp(program, compute_strata(program))

        assert violations("<=", same_stratum)
        assert violations("<", same_stratum) == []
        assert violations("<=", lower_stratum) == []
        try:
            compute_possible_models(parse_program(rule.format(op="<=") + same_stratum))
        except StratificationError:
            pass
        else:
            raise AssertionError("the t <= time program was evaluated")


def test_criterion_05_una_functional_role():
    with criterion(5, "functional r: SAT without UNA, UNSAT with UNA", limit=1):
        a, b, c = Const("a"), Const("b"), Const("c")
        r = dl.Role("r")
        abox = dl.ABox.of([dl.RoleAssertion(a, c, r), dl.RoleAssertion(a, b, r)])
        tbox = dl.TBox((), frozenset({r}))
        assert dl.is_satisfiable(abox, tbox)
        assert not dl.is_satisfiable(abox | dl.ABox.of(dl.una({a, b, c})), tbox)


def test_criterion_06_materialization():
    with criterion(6, "TempBox(0, Box(i)) exactly for i in {0, 1, 5}", limit=5):
        (model,) = _models("materialization")
        temp_boxes = {a.args[1] for a in model if a.pred == "TempBox" and a.args[0] == Num(0)}
        assert temp_boxes == {box(0), box(1), box(5)}


def test_criterion_07_ec_dl_chain():
    with criterion(7, "sensor event at 20 gives High Temp and KnownTempBox at 21", limit=5):
        program, strata = load_paths(scenario("baseline").paths)
        assert Atom("Happens", (Num(20), Fn("SensorEvent", (box(2), Num(10))))) in {
            a for r in program.rules if r.is_fact for a in r.head_atoms()}
        (model,) = compute_possible_models(program, strata=strata)
        assert Atom("HoldsAt", (Num(21), hasa(box(2), Const("Temp"), Const("High")))) in model
        assert Atom("KnownTempBox", (Num(21), box(2))) in model


def test_criterion_08_aggregation():
    with criterion(8, "Unloaded(51, {Box(0)..Box(4)}) in the baseline model", limit=10):
        (model,) = _models("baseline")
        unloaded = [a for a in model if a.pred == "Unloaded"]
        assert unloaded == [Atom("Unloaded", (Num(51), SetVal(frozenset(box(i) for i in range(5)))))]


def test_criterion_09_diagnosis_baseline():
    with criterion(9, "one model with BrokenCooling and nothing on Box(1)", limit=10, hard_limit=False):
        models = _models("baseline")
        assert len(models) == 1
        (model,) = models
        assert Atom("Anomaly", (Num(51), Const("BrokenCooling"))) in model
        tampered_1 = Fn("TamperedBox", (box(1),))
        assert not any(a.pred == "Anomaly" and tampered_1 in a.args for a in model)


def test_criterion_10_diagnosis_variant():
    with criterion(10, "modified sensor: TamperedBox(Box(2)) and the two negations", limit=10):
        models = _models("modified_sensor")
        assert len(models) == 1
        (model,) = models
        assert Atom("Anomaly", (Num(51), Fn("TamperedBox", (box(2),)))) in model
        assert Atom("Anomaly", (Num(51), Fn("TamperedBox", (box(0),))), neg=True) in model
        assert Atom("Anomaly", (Num(51), Const("BrokenCooling")), neg=True) in model


def test_criterion_11_property_suites():
    names = ["baseline", "modified_sensor", "materialization", "coldbox",
             "ramification_naive", "ramification_all"]
    with criterion(11, "frame, three-valuedness, support, verification and DL consistency"):
        checked = 0
        for name in names:
            program, strata = load_paths(scenario(name).paths)
            for model in compute_possible_models(program, strata=strata):
                assert all_violations(program, model, strata) == [], name
                checked += 1
        for seed in range(100):
            text = random_ec_program(random.Random(seed))
            program = program_of(text, prelude=True)
            strata = compute_strata(program)
            for model in compute_possible_models(program, strata=strata):
                assert all_violations(program, model, strata) == [], f"seed {seed}:\n{text}"
                checked += 1
        assert checked >= 106
