"""Pretty-printing of rules, programs and models, plus the machine-readable model format.

Machine format, one model after another::

    #model 1
    Anomaly(51, BrokenCooling).
    ...
    #end
    #models 1

Each atom line is a ground fact in program syntax, so a model block can be
fed back to the parser.
"""
from __future__ import annotations

from .kernel import atom_key
from .rules import (
    AboxAt, Builtin, Choose, Collect, Comprehension, DlCall, Let, MapRole, Not,
    Ordinary, TimeCmp,
)


def render_guard(guard):
    return "(" + render_body(guard) + ")"


def render_literal(lit) -> str:
    if isinstance(lit, Ordinary):
        return str(lit.atom)
    if isinstance(lit, Comprehension):
        rest = "".join(f", {a}" for a in lit.atom.args[1:])
        text = f"{lit.atom.pred}({lit.var} {lit.op} {lit.bound}{rest})"
        return f"{text} STH {render_guard(lit.guard)}" if lit.guard else text
    if isinstance(lit, (Builtin, TimeCmp)):
        left, right = lit.args if isinstance(lit, Builtin) else (lit.left, lit.right)
        return f"{left} {lit.op} {right}"
    if isinstance(lit, Let):
        return f"LET({lit.var}, {lit.term})"
    if isinstance(lit, Choose):
        return f"CHOOSE({lit.var}, {lit.terms})"
    if isinstance(lit, Collect):
        return f"COLLECT({lit.var}, {lit.template} STH {render_guard(lit.guard)})"
    if isinstance(lit, MapRole):
        return f"MAPROLE({lit.var}, {lit.items}, {lit.role}, {lit.filler})"
    if isinstance(lit, DlCall):
        return render_dlcall(lit)
    if isinstance(lit, Not):
        return f"not({render_body(lit.body)})"
    raise TypeError(f"not a body literal: {lit!r}")


def _render_abox(parts):
    return " ++ ".join(f"ABOXAT({p.time})" if isinstance(p, AboxAt) else str(p)
                       for p in parts)


def render_dlcall(call) -> str:
    if call.kind == "entails":
        query = (str(call.query[0]) if len(call.query) == 1
                 else "[" + ", ".join(map(str, call.query)) + "]")
        if call.abox is None:
            return f"{call.tbox} |= {query}"
        return f"({_render_abox(call.abox)}, {call.tbox}) |= {query}"
    kw = "DLISSAT" if call.kind == "sat" else "DLISUNSAT"
    if call.abox is None:
        return f"{kw}({call.tbox})"
    return f"{kw}({_render_abox(call.abox)}, {call.tbox})"


def render_body(body) -> str:
    return ", ".join(render_literal(lit) for lit in body)


def render_head(head) -> str:
    if head is None:
        return "fail"
    parts = []
    for disjunct in head:
        text = " and ".join(map(str, disjunct))
        if len(disjunct) > 1 and len(head) > 1:
            text = f"({text})"
        parts.append(text)
    return " or ".join(parts)


def render_rule(rule, label=True) -> str:
    text = render_head(rule.head)
    if rule.body or rule.head is None:
        text += " :- " + render_body(rule.body)
    text += "."
    if label and rule.name:
        text += f"  // {rule.name}"
    return text


def render_tbox(name, tbox) -> str:
    lines = [f"tbox {name} {{"]
    for lhs, rhs in tbox.gcis:
        lines.append(f"  {lhs} ⊑ {rhs}.")
    for role in sorted(tbox.functional, key=str):
        lines.append(f"  functional {role}.")
    lines.append("}")
    return "\n".join(lines)


def render_program(program) -> str:
    chunks = [render_tbox(name, tb) for name, tb in program.tboxes.items()]
    horizon = program.directives.get("horizon")
    if horizon:
        chunks.append("#horizon " + ", ".join(map(str, horizon)) + ".")
    chunks.extend(render_rule(r) for r in program.rules)
    return "\n".join(chunks) + ("\n" if chunks else "")


def sorted_atoms(model):
    return sorted(model, key=atom_key)


def render_model(model) -> str:
    """Atoms of a model, one per line, in (predicate, time, arguments) order."""
    return "\n".join(str(a) for a in sorted_atoms(model))


def write_machine(models) -> str:
    lines = []
    for k, model in enumerate(models, 1):
        lines.append(f"#model {k}")
        lines.extend(f"{a}." for a in sorted_atoms(model))
        lines.append("#end")
    lines.append(f"#models {len(models)}")
    return "\n".join(lines) + "\n"


def read_machine(text):
    """Parse machine-format output back into a list of frozensets of atoms."""
    from .errors import ParseError
    from .parser import parse_program

    models, current, count = [], None, None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#model "):
            current = []
        elif line == "#end":
            if current is None:
                raise ParseError("#end without #model", lineno, 1)
            prog = parse_program("\n".join(current))
            models.append(frozenset(a for r in prog.rules for a in r.head_atoms()))
            current = None
        elif line.startswith("#models "):
            count = int(line.split()[1])
        elif current is not None:
            current.append(line)
        else:
            raise ParseError(f"unexpected line {line!r}", lineno, 1)
    if count is not None and count != len(models):
        raise ParseError(f"footer announces {count} models but {len(models)} were read")
    return models
