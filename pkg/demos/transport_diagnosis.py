"""Diagnose a refrigerated delivery from sensor events.

Runs the transport scenario twice: once with the recorded sensor readings and
once with the time-40 Box(0) reading lowered. The first run blames the truck's
cooling, the second a tampered box.
"""
from fusecalc.cli import load
from fusecalc.corpus import scenario
from fusecalc.engine import Evaluator


def diagnose(name):
    s = scenario(name)
    program, strata, _warnings = load(s.paths)
    models = Evaluator(program, strata).run()
    print(f"{name}: {len(models)} model(s)")
    for k, model in enumerate(models, 1):
        found = sorted(str(a) for a in model if a.pred == "Anomaly")
        known = sorted(str(a.args[1]) for a in model
                       if a.pred == "KnownTempBox" and a.time == 51)
        print(f"  model {k}: boxes with known temperature at 51: {', '.join(known)}")
        for line in found:
            print(f"    {line}")


if __name__ == "__main__":
    diagnose("baseline")
    diagnose("modified_sensor")
