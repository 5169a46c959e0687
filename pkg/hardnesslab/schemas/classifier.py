from typing import Annotated, List, Literal, Tuple, Union

from pydantic import BaseModel, Field

from hardnesslab.models.classifier import (
    BooleanOfHalfspaces,
    Clause,
    CnfFormula,
    ConstantClassifier,
    DnfFormula,
    Halfspace,
    Term,
)

Coefficient = Union[int, float]
BitRecord = Tuple[int, int, int]


class HalfspaceFile(BaseModel):
    type: Literal["halfspace"] = "halfspace"
    theta: Coefficient = 0
    x: List[Tuple[int, int, int, Coefficient]] = []
    y: List[Tuple[int, int, int, Coefficient]] = []

    def to_model(self) -> Halfspace:
        return Halfspace(
            {(v, i, q): c for v, i, q, c in self.x},
            {(v, i, q): c for v, i, q, c in self.y},
            self.theta,
        )

    @classmethod
    def from_model(cls, h: Halfspace) -> "HalfspaceFile":
        def rows(coefficients):
            return [(v, i, q, _plain(c)) for (v, i, q), c in sorted(coefficients.items())]

        return cls(theta=_plain(h.theta), x=rows(h.cx), y=rows(h.cy))


class LiteralSet(BaseModel):
    x: List[BitRecord] = []
    y: List[BitRecord] = []
    neg_x: List[BitRecord] = []
    neg_y: List[BitRecord] = []

    def parts(self):
        return frozenset(self.x), frozenset(self.y), frozenset(self.neg_x), frozenset(self.neg_y)

    @classmethod
    def from_parts(cls, item) -> "LiteralSet":
        return cls(
            x=sorted(item.pos_x), y=sorted(item.pos_y), neg_x=sorted(item.neg_x), neg_y=sorted(item.neg_y)
        )


class CnfFile(BaseModel):
    type: Literal["cnf"] = "cnf"
    clauses: List[LiteralSet]

    def to_model(self) -> CnfFormula:
        return CnfFormula(tuple(Clause(*c.parts()) for c in self.clauses))


class DnfFile(BaseModel):
    type: Literal["dnf"] = "dnf"
    terms: List[LiteralSet]

    def to_model(self) -> DnfFormula:
        return DnfFormula(tuple(Term(*t.parts()) for t in self.terms))


class CombinerFile(BaseModel):
    type: Literal["combiner"] = "combiner"
    halfspaces: List[HalfspaceFile] = Field(..., min_length=1)
    table: List[Literal[0, 1]]

    def to_model(self) -> BooleanOfHalfspaces:
        return BooleanOfHalfspaces(tuple(h.to_model() for h in self.halfspaces), tuple(self.table))


class ConstantFile(BaseModel):
    type: Literal["constant"] = "constant"
    value: Literal[0, 1] = 1

    def to_model(self) -> ConstantClassifier:
        return ConstantClassifier(self.value)


ClassifierFile = Annotated[
    Union[HalfspaceFile, CnfFile, DnfFile, CombinerFile, ConstantFile],
    Field(discriminator="type"),
]


class ClassifierDocument(BaseModel):
    classifier: ClassifierFile


class CoefficientBundle(BaseModel):
    """Per-halfspace coefficients handed to the decoder."""

    halfspaces: List[HalfspaceFile] = Field(..., min_length=1)

    def to_model(self) -> List[Halfspace]:
        return [h.to_model() for h in self.halfspaces]


def classifier_to_file(classifier) -> BaseModel:
    if isinstance(classifier, Halfspace):
        return HalfspaceFile.from_model(classifier)
    if isinstance(classifier, CnfFormula):
        return CnfFile(clauses=[LiteralSet.from_parts(c) for c in classifier.clauses])
    if isinstance(classifier, DnfFormula):
        return DnfFile(terms=[LiteralSet.from_parts(t) for t in classifier.terms])
    if isinstance(classifier, BooleanOfHalfspaces):
        return CombinerFile(
            halfspaces=[HalfspaceFile.from_model(h) for h in classifier.halfspaces],
            table=list(classifier.truth_table),
        )
    if isinstance(classifier, ConstantClassifier):
        return ConstantFile(value=classifier.value)
    raise TypeError(f"no file format for {type(classifier).__name__}")


def _plain(value):
    if isinstance(value, int):
        return int(value)
    return float(value)
