"""Possible models of a small disjunctive program, with the firing trace.

The disjunction ``a or c`` is split into {a}, {c} and {a, c}. The split {c}
collapses into {a, c} because ``a :- b`` still derives ``a``.
"""
from fusecalc.engine import Evaluator
from fusecalc.parser import parse_program
from fusecalc.render import render_model
from fusecalc.strat import compute_strata

TEXT = """
a :- b.
a or c :- b.
b :- not d.
"""


def show(index, rule, beta, layer, new):
    print(f"  fire {rule}  adds {', '.join(map(str, new)) or 'nothing'}")


if __name__ == "__main__":
    program = parse_program(TEXT)
    strata = compute_strata(program)
    print("strata:", strata.by_name())
    models = Evaluator(program, strata, trace=show).run()
    for k, model in enumerate(models, 1):
        print(f"model {k}: {{{', '.join(render_model(model).splitlines())}}}")
