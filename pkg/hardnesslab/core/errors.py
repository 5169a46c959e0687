from typing import Any, Optional


class LabError(Exception):
    """Base error; `exit_code` is what the command line returns for it."""

    exit_code = 2

    def __init__(self, detail: str, witness: Optional[Any] = None):
        super().__init__(detail)
        self.detail = detail
        self.witness = witness

    def __str__(self) -> str:
        if self.witness is None:
            return self.detail
        return f"{self.detail} (witness: {self.witness})"


class ParameterError(LabError):
    pass


class InfeasibleInstanceError(ParameterError):
    pass


class BudgetError(LabError):
    """An exact computation was asked for beyond its enumeration budget."""


class FormatError(LabError):
    pass


class HypothesisError(LabError):
    """A lemma hypothesis does not hold for the supplied inputs."""

    exit_code = 1


class NicenessError(HypothesisError):
    pass


class StructuralConditionError(HypothesisError):
    pass


class CouplingError(HypothesisError):
    pass


class InvariantError(LabError):
    exit_code = 1
