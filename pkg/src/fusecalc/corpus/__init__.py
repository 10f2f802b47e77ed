"""Example programs of the transport scenario with golden model files.

Each scenario is a list of ``.fmp`` files run together (with the
event-calculus prelude unless stated otherwise), the expected machine-format
output and the expected exit status of ``fusecalc run``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

CORPUS_DIR = Path(__file__).resolve().parent

_TRANSPORT = ("transport_kb.fmp", "transport_domain.fmp")


@dataclass(frozen=True)
class Scenario:
    name: str
    files: tuple
    exit_status: int = 0
    prelude: bool = True
    description: str = ""

    @property
    def paths(self):
        return [CORPUS_DIR / f for f in self.files]

    @property
    def expected_path(self):
        return CORPUS_DIR / f"{self.name}.expected"

    def expected(self) -> str:
        return self.expected_path.read_text(encoding="utf-8")

    def argv(self):
        args = ["run", *map(str, self.paths), "--format", "machine"]
        if not self.prelude:
            args.append("--no-prelude")
        return args


def scenario_suite() -> list:
    return [
        Scenario("baseline", _TRANSPORT + ("transport_actions.fmp", "diagnosis.fmp"),
                 description="transport run with diagnosis; broken cooling"),
        Scenario("modified_sensor",
                 _TRANSPORT + ("transport_actions_modified.fmp", "diagnosis.fmp"),
                 description="time-40 Box(0) reading non-positive; Box(2) tampered"),
        Scenario("materialization", ("materialization.fmp",),
                 description="Box materialization and TempBox at time 0"),
        Scenario("coldbox", ("coldbox.fmp",),
                 description="DL-call under negation over past ABoxes"),
        Scenario("ramification_naive",
                 _TRANSPORT + ("ramification_actions.fmp", "ramification_naive.fmp"),
                 description="terminating Temp directly misses TBox-implied Temp"),
        Scenario("ramification_all",
                 _TRANSPORT + ("ramification_actions.fmp", "ramification_all.fmp"),
                 description="terminating all concept assertions removes implied Temp"),
    ]


def scenario(name) -> Scenario:
    for s in scenario_suite():
        if s.name == name:
            return s
    raise KeyError(name)
