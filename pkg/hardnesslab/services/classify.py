"""Classifier evaluation and the canonical constructions."""
import itertools
from typing import Iterable, Tuple

from hardnesslab.core.errors import BudgetError, ParameterError
from hardnesslab.models.classifier import (
    BooleanOfHalfspaces,
    Classifier,
    Clause,
    CnfFormula,
    Coordinate,
    Halfspace,
)
from hardnesslab.models.label_cover import LabelCoverInstance, Labeling
from hardnesslab.models.point import SamplePoint
from hardnesslab.schemas.params import GadgetParams

MAX_EXACT_LABELS = 50
MAX_ENUMERATED_LABELS = 20


def evaluate(classifier: Classifier, point: SamplePoint) -> int:
    return classifier.evaluate(point)


def build_completeness_cnf(
    instance: LabelCoverInstance, labeling: Labeling, params: GadgetParams
) -> Tuple[Clause, Clause]:
    """C1 = OR of X_{v,sigma(v),q}, C2 = OR of Y_{v,sigma(v),q} over all v, q."""
    if len(labeling) != instance.num_vertices:
        raise ParameterError("labeling must assign every vertex")
    bits = frozenset((v, labeling[v], q) for v in range(instance.num_vertices) for q in range(params.Q))
    return Clause(pos_x=bits), Clause(pos_y=bits)


def completeness_classifier(
    instance: LabelCoverInstance, labeling: Labeling, params: GadgetParams
) -> CnfFormula:
    c1, c2 = build_completeness_cnf(instance, labeling, params)
    return CnfFormula((c1, c2))


def moment_attack_halfspace(M: int) -> Halfspace:
    """sum_i X_i - 3M/4 on the basic test's coordinates."""
    if M < 1:
        raise ParameterError("M must be positive")
    return first_moment_halfspace((("X", 0, i, 0) for i in range(M)), -3 * M / 4)


def first_moment_halfspace(coordinates: Iterable[Coordinate], theta: float) -> Halfspace:
    return Halfspace.from_coordinates({c: 1 for c in coordinates}, theta)


def pathological_form(M: int, k: int) -> Halfspace:
    """L = sum_i 2^i X_i - sum_i sum_r 2^i Y_{r,i}, with exact integer coefficients."""
    if M > MAX_EXACT_LABELS:
        raise BudgetError(f"M={M} exceeds the exact-arithmetic guard of {MAX_EXACT_LABELS}")
    if M < 1 or k < 1:
        raise ParameterError("M and k must be positive")
    cx = {(0, i, 0): 2**i for i in range(M)}
    cy = {(r, i, 0): -(2**i) for i in range(M) for r in range(k)}
    return Halfspace(cx, cy, 0)


def pathological_pair(M: int, k: int) -> BooleanOfHalfspaces:
    """pos(L) and pos(-L): fires exactly when L = 0."""
    form = pathological_form(M, k)
    return BooleanOfHalfspaces((form, form.negated()), (0, 0, 0, 1))


def dictator_halfspace(labeling: Labeling, slots: int = 1) -> Halfspace:
    """Unit weight on the labelled block of every vertex, both sides."""
    cx = {(v, i, q): 1 for v, i in enumerate(labeling.assignment) for q in range(slots)}
    return Halfspace(cx, dict(cx), 0)


def pathological_zero_supports(M: int, k: int) -> int:
    """Number of zero-class supports of the basic test on which L vanishes.

    A zero-class point sets, for each i, either X_i or one Y_{r,i}; every
    Y_{r,i} carries the same coefficient, so the sign pattern over i
    determines L.
    """
    if M > MAX_ENUMERATED_LABELS:
        raise BudgetError(f"enumerating 2^M sign patterns is limited to M <= {MAX_ENUMERATED_LABELS}, got {M}")
    form = pathological_form(M, k)
    zeros = 0
    for signs in itertools.product((1, -1), repeat=M):
        value = sum(form.cx[(0, i, 0)] if s == 1 else form.cy[(0, i, 0)] for i, s in enumerate(signs))
        zeros += value == 0
    return zeros
