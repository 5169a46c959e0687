import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Dict, FrozenSet, Iterable, Mapping, Protocol, Tuple, Union

from hardnesslab.models.point import Bit, SamplePoint

Number = Union[int, float, Fraction]
Coordinate = Tuple[str, int, int, int]  # (side, vertex, big label, slot)


def pos(value: Number) -> int:
    """1{value >= 0}; pos(0) = 1."""
    return 1 if value >= 0 else 0


class Classifier(Protocol):
    def evaluate(self, point: SamplePoint) -> int: ...


@dataclass(frozen=True)
class ConstantClassifier:
    value: int = 1

    def evaluate(self, point: SamplePoint) -> int:
        return self.value


@dataclass(frozen=True, eq=False)
class Halfspace:
    """pos(<c_X, X> + <c_Y, Y> + theta) over sparse bits.

    Integer or rational coefficients are summed exactly; floats with
    compensated summation.
    """

    cx: Mapping[Bit, Number]
    cy: Mapping[Bit, Number]
    theta: Number = 0.0
    exact: bool = field(init=False)

    def __post_init__(self):
        cx = {tuple(map(int, b)): c for b, c in self.cx.items() if c != 0}
        cy = {tuple(map(int, b)): c for b, c in self.cy.items() if c != 0}
        values = list(cx.values()) + list(cy.values()) + [self.theta]
        for value in values:
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError("halfspace coefficients must be finite")
        object.__setattr__(self, "cx", cx)
        object.__setattr__(self, "cy", cy)
        object.__setattr__(self, "exact", all(isinstance(v, Rational) for v in values))

    @classmethod
    def from_coordinates(cls, coefficients: Mapping[Coordinate, Number], theta: Number = 0.0) -> "Halfspace":
        cx: Dict[Bit, Number] = {}
        cy: Dict[Bit, Number] = {}
        for (side, v, i, q), c in coefficients.items():
            (cx if side == "X" else cy)[(v, i, q)] = c
        return cls(cx, cy, theta)

    def value(self, point: SamplePoint) -> Number:
        cx, cy = self.cx, self.cy
        terms = [cx[b] for b in point.x if b in cx]
        terms.extend(cy[b] for b in point.y if b in cy)
        if self.exact:
            return sum(terms) + self.theta
        terms.append(self.theta)
        return math.fsum(terms)

    def evaluate(self, point: SamplePoint) -> int:
        return pos(self.value(point))

    def side(self, side: str) -> Mapping[Bit, Number]:
        return self.cx if side == "X" else self.cy

    def vertex_coefficients(self, side: str, vertex: int) -> Dict[Tuple[int, int], Number]:
        """(label, slot) -> coefficient for one (side, vertex)."""
        return {(i, q): c for (v, i, q), c in self.side(side).items() if v == vertex}

    def negated(self) -> "Halfspace":
        return Halfspace(
            {b: -c for b, c in self.cx.items()},
            {b: -c for b, c in self.cy.items()},
            -self.theta,
        )

    def scaled(self, factor: Number) -> "Halfspace":
        return Halfspace(
            {b: c * factor for b, c in self.cx.items()},
            {b: c * factor for b, c in self.cy.items()},
            self.theta * factor,
        )

    def without(self, side: str, vertex: int, labels: Iterable[int]) -> "Halfspace":
        drop = set(labels)
        keep = {b: c for b, c in self.side(side).items() if not (b[0] == vertex and b[1] in drop)}
        if side == "X":
            return Halfspace(keep, self.cy, self.theta)
        return Halfspace(self.cx, keep, self.theta)

    def coefficient_mass(self) -> float:
        return math.fsum(float(c) ** 2 for c in list(self.cx.values()) + list(self.cy.values()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Halfspace):
            return NotImplemented
        return self.cx == other.cx and self.cy == other.cy and self.theta == other.theta

    def __hash__(self) -> int:
        return hash((frozenset(self.cx.items()), frozenset(self.cy.items()), self.theta))


@dataclass(frozen=True)
class BooleanOfHalfspaces:
    """f(pos(h_1), ..., pos(h_l)) with f given as a truth table.

    Pattern index: bit s is the sign of halfspace s.
    """

    halfspaces: Tuple[Halfspace, ...]
    truth_table: Tuple[int, ...]

    def __post_init__(self):
        if len(self.truth_table) != 2 ** len(self.halfspaces):
            raise ValueError("truth table must have 2^l entries")

    def pattern(self, point: SamplePoint) -> int:
        index = 0
        for s, h in enumerate(self.halfspaces):
            index |= h.evaluate(point) << s
        return index

    def evaluate(self, point: SamplePoint) -> int:
        return self.truth_table[self.pattern(point)]


@dataclass(frozen=True)
class Clause:
    """OR of literals; ``pos_*`` hold positive literals, ``neg_*`` negated ones."""

    pos_x: FrozenSet[Bit] = frozenset()
    pos_y: FrozenSet[Bit] = frozenset()
    neg_x: FrozenSet[Bit] = frozenset()
    neg_y: FrozenSet[Bit] = frozenset()

    def evaluate(self, point: SamplePoint) -> int:
        if not self.pos_x.isdisjoint(point.x) or not self.pos_y.isdisjoint(point.y):
            return 1
        if not self.neg_x <= point.x or not self.neg_y <= point.y:
            return 1
        return 0

    def negated_term(self) -> "Term":
        return Term(pos_x=self.neg_x, pos_y=self.neg_y, neg_x=self.pos_x, neg_y=self.pos_y)


@dataclass(frozen=True)
class Term:
    """AND of literals."""

    pos_x: FrozenSet[Bit] = frozenset()
    pos_y: FrozenSet[Bit] = frozenset()
    neg_x: FrozenSet[Bit] = frozenset()
    neg_y: FrozenSet[Bit] = frozenset()

    def evaluate(self, point: SamplePoint) -> int:
        if not (self.pos_x <= point.x and self.pos_y <= point.y):
            return 0
        if not (self.neg_x.isdisjoint(point.x) and self.neg_y.isdisjoint(point.y)):
            return 0
        return 1

    def negated_clause(self) -> Clause:
        return Clause(pos_x=self.neg_x, pos_y=self.neg_y, neg_x=self.pos_x, neg_y=self.pos_y)


@dataclass(frozen=True)
class CnfFormula:
    clauses: Tuple[Clause, ...]

    def evaluate(self, point: SamplePoint) -> int:
        return int(all(c.evaluate(point) for c in self.clauses))

    def negated(self) -> "DnfFormula":
        return DnfFormula(tuple(c.negated_term() for c in self.clauses))


@dataclass(frozen=True)
class DnfFormula:
    terms: Tuple[Term, ...]

    def evaluate(self, point: SamplePoint) -> int:
        return int(any(t.evaluate(point) for t in self.terms))

    def negated(self) -> CnfFormula:
        return CnfFormula(tuple(t.negated_clause() for t in self.terms))
