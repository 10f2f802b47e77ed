"""Exception hierarchy shared by all fusecalc modules."""


class FusecalcError(Exception):
    """Base class for every error raised by fusecalc."""


class StaticError(FusecalcError):
    """A program was rejected before model computation started."""


class ParseError(StaticError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if line is not None:
            where = f"{source + ':' if source else ''}{line}:{column}: "
        super().__init__(where + message)


class RangeRestrictionError(StaticError):
    def __init__(self, rule, variables):
        self.rule = rule
        self.variables = sorted(variables)
        super().__init__(
            f"rule is not range-restricted, head variables {', '.join(self.variables)} "
            f"are not free in the body: {rule}"
        )


class StratificationError(StaticError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n  ".join(str(v) for v in self.violations)
        super().__init__(f"program is not SBTP-stratified:\n  {lines}")


class EvaluationError(FusecalcError):
    """Raised while evaluating a body, e.g. an unbound variable reaching a built-in."""


class BudgetExceeded(FusecalcError):
    def __init__(self, steps, predicate):
        self.steps = steps
        self.predicate = predicate
        super().__init__(
            f"step budget of {steps} exceeded; most produced predicate: {predicate}"
        )


class ReasonerUnknown(FusecalcError):
    """The DL tableau ran out of budget; no verdict is available."""
