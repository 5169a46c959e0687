# Models module - immutable domain objects
from hardnesslab.models.label_cover import Hyperedge, LabelCoverInstance, Labeling
from hardnesslab.models.point import BlockDraw, SamplePoint, Transcript
from hardnesslab.models.block_vector import BlockVector, CriticalIndexReport
from hardnesslab.models.classifier import (
    BooleanOfHalfspaces,
    Clause,
    CnfFormula,
    ConstantClassifier,
    DnfFormula,
    Halfspace,
    Term,
)

__all__ = [
    "Hyperedge",
    "LabelCoverInstance",
    "Labeling",
    "BlockDraw",
    "SamplePoint",
    "Transcript",
    "BlockVector",
    "CriticalIndexReport",
    "BooleanOfHalfspaces",
    "Clause",
    "CnfFormula",
    "ConstantClassifier",
    "DnfFormula",
    "Halfspace",
    "Term",
]
