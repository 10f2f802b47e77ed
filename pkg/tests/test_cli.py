import io

from fusecalc.cli import EXIT_EVAL, EXIT_MODELS, EXIT_NO_MODELS, EXIT_STATIC, main
from fusecalc.corpus import CORPUS_DIR, scenario
from fusecalc.engine import unsupported_atoms, verify_model
from fusecalc.eventcalc import render_prelude
from fusecalc.render import read_machine

from helpers import load_paths


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    status = main(list(map(str, argv)), out, err)
    return status, out.getvalue(), err.getvalue()


def write(tmp_path, text, name="prog.fmp"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


BASELINE = scenario("baseline").paths


def test_run_transport():
    status, out, _err = run("run", *BASELINE)
    assert status == EXIT_MODELS
    assert "% model 1 of 1" in out
    assert "Anomaly(51, BrokenCooling)" in out


def test_run_empty_file(tmp_path):
    status, out, _err = run("run", write(tmp_path, ""))
    assert status == EXIT_MODELS
    assert read_machine(run("run", write(tmp_path, ""), "--format", "machine",
                            "--no-prelude")[1]) == [frozenset()]
    assert out.startswith("% model 1 of 1")


def test_run_without_models(tmp_path):
    status, out, _err = run("run", write(tmp_path, "fail."))
    assert status == EXIT_NO_MODELS
    assert out == "no models\n"


def test_check_ok():
    status, out, _err = run("check", *BASELINE)
    assert status == EXIT_MODELS
    assert out.startswith("ok:")


def test_check_rejects_sbtp_violation(tmp_path):
    path = write(tmp_path, "p(time, x) :- q(time, x), not(r(t, y), t <= time).\n"
                           "r(time, x) :- p(time, x).\n")
    status, _out, err = run("check", path)
    assert status == EXIT_STATIC
    assert "error" in err


def test_parse_error_and_missing_file(tmp_path):
    status, _out, err = run("run", write(tmp_path, "P(0 :- ."))
    assert status == EXIT_STATIC and "error" in err
    status, _out, err = run("run", tmp_path / "absent.fmp")
    assert status == EXIT_STATIC and "error" in err


def test_step_budget(tmp_path):
    path = write(tmp_path, "P(0). P(time+1) :- P(time).")
    status, _out, err = run("run", path, "--max-steps", "40")
    assert status == EXIT_EVAL
    assert "P" in err
    assert run("run", path, "--max-steps", "0")[0] == EXIT_STATIC


def test_output_is_byte_identical_across_runs():
    first = run("run", *BASELINE, "--format", "machine")
    second = run("run", *BASELINE, "--format", "machine")
    assert first == second


def test_machine_output_round_trips_and_verifies():
    status, out, _err = run("run", *scenario("modified_sensor").paths, "--format", "machine")
    assert status == EXIT_MODELS
    models = read_machine(out)
    assert len(models) == 1
    program, strata = load_paths(scenario("modified_sensor").paths)
    for model in models:
        assert verify_model(program, model, strata) == []
        assert unsupported_atoms(program, model, strata) == []


def test_trace_goes_to_stderr(tmp_path):
    path = write(tmp_path, "P(0). Q(time) :- P(time). fail :- Q(time), R(time).")
    status, out, err = run("run", path, "--trace", "--no-prelude")
    assert status == EXIT_MODELS
    lines = err.splitlines()
    assert lines and all(line.startswith("fire ") for line in lines)
    assert "fire rule 2 {time=0} at time 0" in err
    assert "fire " not in out


def test_first_model(tmp_path):
    path = write(tmp_path, "a or b.")
    assert run("run", path, "--no-prelude")[1].count("% model") == 3
    status, out, _err = run("run", path, "--no-prelude", "--first-model")
    assert status == EXIT_MODELS
    assert out.count("% model") == 1


def test_dump_prelude():
    status, out, _err = run("--dump-prelude")
    assert status == EXIT_MODELS
    assert out == render_prelude()


def test_explain_strata():
    status, out, _err = run("check", *BASELINE, "--explain-strata")
    assert status == EXIT_MODELS
    assert "HoldsAt" in out


def test_dl_check(tmp_path):
    status, out, _err = run("dl-check", CORPUS_DIR / "transport_kb.fmp")
    assert status == EXIT_MODELS
    assert "SAT" in out and "UNSAT" not in out
    bad = write(tmp_path, "tbox kb {\n  A ⊑ Not(B).\n}\nX : A @ 0.\nX : B @ 0.\n", "kb.fmp")
    status, out, _err = run("dl-check", bad)
    assert status == EXIT_NO_MODELS
    assert out.strip() == "kb @ 0: UNSAT"


def test_dl_check_una_flag(tmp_path):
    text = "tbox kb {\n  functional R.\n}\n(X, A) : R @ 0.\n(X, B) : R @ 0.\n"
    path = write(tmp_path, text, "kb.fmp")
    assert run("dl-check", path)[0] == EXIT_NO_MODELS
    assert run("dl-check", path, "--no-una")[0] == EXIT_MODELS


def test_no_prelude_drops_step_facts(tmp_path):
    path = write(tmp_path, "P(0). P(4).")
    assert "Step(4, 0)" in run("run", path)[1]
    assert "Step" not in run("run", path, "--no-prelude")[1]


def test_missing_command_is_a_usage_error():
    status, _out, err = run()
    assert status == EXIT_STATIC and "usage" in err
