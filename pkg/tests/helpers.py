"""Shared test utilities."""
from __future__ import annotations

import time
from contextlib import contextmanager

from fusecalc.cli import load
from fusecalc.engine import compute_possible_models
from fusecalc.eventcalc import assemble
from fusecalc.parser import parse_files, parse_program
from fusecalc.rules import check_program

# (criterion number, passed, seconds, description) collected by test_acceptance
ACCEPTANCE_RESULTS = []


def program_of(text, prelude=False):
    program = assemble(parse_program(text), prelude_rules=prelude)
    check_program(program)
    return program


def models_of(text, prelude=False, **kw):
    """Possible models of a program text, each as a frozenset of atom strings."""
    models = compute_possible_models(program_of(text, prelude), **kw)
    return {frozenset(str(a) for a in m) for m in models}


def load_paths(paths, prelude=True):
    program, strata, _warnings = load(paths, prelude=prelude)
    return program, strata


def raw_program(paths):
    return parse_files(paths)


@contextmanager
def criterion(number, description, limit=None, hard_limit=True):
    """Time a block, record its verdict and print one pass/fail line."""
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = limit is None or elapsed < limit
        passed = ok and (within or not hard_limit)
        note = "" if within else f" (over the {limit:g} s target)"
        ACCEPTANCE_RESULTS.append((number, passed, elapsed, description + note))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} "
              f"[{elapsed:.2f} s] {description}{note}")
    if ok and hard_limit and not within:
        raise AssertionError(f"criterion {number} took {elapsed:.2f} s, limit {limit:g} s")
