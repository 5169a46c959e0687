from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Tuple


@dataclass(frozen=True)
class Hyperedge:
    """A 2k-vertex constraint with a fixed e_X / e_Y split.

    ``projections`` is aligned with ``vertices``: ``projections[p][i]`` is the
    small label of big label ``i`` at vertex ``vertices[p]``.
    """

    vertices: Tuple[int, ...]
    ex: Tuple[int, ...]
    ey: Tuple[int, ...]
    projections: Tuple[Tuple[int, ...], ...]
    _position: Dict[int, int] = field(init=False, repr=False, compare=False, hash=False)
    _preimages: Tuple[Tuple[Tuple[int, ...], ...], ...] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        object.__setattr__(self, "_position", {v: p for p, v in enumerate(self.vertices)})
        preimages = []
        for proj in self.projections:
            buckets: Dict[int, List[int]] = {}
            for label, small in enumerate(proj):
                buckets.setdefault(small, []).append(label)
            size = max(buckets) + 1 if buckets else 0
            preimages.append(tuple(tuple(buckets.get(j, ())) for j in range(size)))
        object.__setattr__(self, "_preimages", tuple(preimages))

    @property
    def k(self) -> int:
        return len(self.ex)

    def contains(self, vertex: int) -> bool:
        return vertex in self._position

    def side(self, vertex: int) -> str:
        return "X" if vertex in self.ex else "Y"

    def projection(self, vertex: int) -> Tuple[int, ...]:
        return self.projections[self._position[vertex]]

    def project(self, vertex: int, label: int) -> int:
        return self.projections[self._position[vertex]][label]

    def preimage(self, vertex: int, small_label: int) -> Tuple[int, ...]:
        table = self._preimages[self._position[vertex]]
        if small_label >= len(table):
            return ()
        return table[small_label]


@dataclass(frozen=True)
class LabelCoverInstance:
    k: int
    M: int
    m: int
    d: int
    num_vertices: int
    edges: Tuple[Hyperedge, ...]

    @cached_property
    def _incidence(self) -> Dict[int, Tuple[int, ...]]:
        incidence: Dict[int, List[int]] = {}
        for e_id, edge in enumerate(self.edges):
            for v in edge.vertices:
                incidence.setdefault(v, []).append(e_id)
        return {v: tuple(ids) for v, ids in incidence.items()}

    def incident_edges(self, vertex: int) -> Tuple[int, ...]:
        return self._incidence.get(vertex, ())

    def max_preimage_size(self) -> int:
        largest = 0
        for edge in self.edges:
            for table in edge._preimages:
                for labels in table:
                    largest = max(largest, len(labels))
        return largest

    def violations(self) -> List[str]:
        """Every broken structural invariant, as readable messages."""
        problems = []
        if not self.edges:
            problems.append("instance has no edges")
        for e_id, edge in enumerate(self.edges):
            if len(set(edge.vertices)) != 2 * self.k:
                problems.append(f"edge {e_id}: expected {2 * self.k} distinct vertices")
            if len(edge.ex) != self.k or len(edge.ey) != self.k:
                problems.append(f"edge {e_id}: e_X/e_Y must have size {self.k}")
            if set(edge.ex) | set(edge.ey) != set(edge.vertices):
                problems.append(f"edge {e_id}: e_X/e_Y do not partition the edge")
            for v in edge.vertices:
                if not 0 <= v < self.num_vertices:
                    problems.append(f"edge {e_id}: vertex {v} out of range")
            for v, proj in zip(edge.vertices, edge.projections):
                if len(proj) != self.M:
                    problems.append(f"edge {e_id}, vertex {v}: projection is not total on [M]")
                if any(not 0 <= j < self.m for j in proj):
                    problems.append(f"edge {e_id}, vertex {v}: projection leaves [m]")
        if self.edges and self.max_preimage_size() > self.d:
            problems.append(f"a preimage exceeds the bound d={self.d}")
        return problems


@dataclass(frozen=True)
class Labeling:
    """Total map vertex -> big label, stored densely by vertex id."""

    assignment: Tuple[int, ...]

    def __getitem__(self, vertex: int) -> int:
        return self.assignment[vertex]

    def __len__(self) -> int:
        return len(self.assignment)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int], num_vertices: int) -> "Labeling":
        missing = [v for v in range(num_vertices) if v not in mapping]
        if missing:
            raise ValueError(f"labeling is not total; missing vertices {missing[:5]}")
        return cls(tuple(int(mapping[v]) for v in range(num_vertices)))

    def as_mapping(self) -> Dict[int, int]:
        return dict(enumerate(self.assignment))
