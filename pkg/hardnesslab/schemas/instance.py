from typing import Dict, List

from pydantic import BaseModel, Field, RootModel, model_validator

from hardnesslab.models.label_cover import Hyperedge, LabelCoverInstance, Labeling


class EdgeRecord(BaseModel):
    vids: List[int] = Field(..., min_length=2)
    ex: List[int]
    ey: List[int]
    proj: Dict[int, List[int]]

    @model_validator(mode="after")
    def _check_projection_keys(self) -> "EdgeRecord":
        if set(self.proj) != set(self.vids):
            raise ValueError("proj must have exactly one entry per vertex of the edge")
        return self


class InstanceFile(BaseModel):
    k: int = Field(..., ge=1)
    M: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    vertices: int = Field(..., ge=1)
    edges: List[EdgeRecord] = Field(..., min_length=1)

    def to_model(self) -> LabelCoverInstance:
        edges = tuple(
            Hyperedge(
                vertices=tuple(e.vids),
                ex=tuple(e.ex),
                ey=tuple(e.ey),
                projections=tuple(tuple(e.proj[v]) for v in e.vids),
            )
            for e in self.edges
        )
        return LabelCoverInstance(self.k, self.M, self.m, self.d, self.vertices, edges)

    @classmethod
    def from_model(cls, instance: LabelCoverInstance) -> "InstanceFile":
        return cls(
            k=instance.k,
            M=instance.M,
            m=instance.m,
            d=instance.d,
            vertices=instance.num_vertices,
            edges=[
                EdgeRecord(
                    vids=list(e.vertices),
                    ex=list(e.ex),
                    ey=list(e.ey),
                    proj={v: list(p) for v, p in zip(e.vertices, e.projections)},
                )
                for e in instance.edges
            ],
        )


class LabelingFile(RootModel[Dict[int, int]]):
    """Bare JSON map vertex id -> label."""

    def to_model(self, num_vertices: int) -> Labeling:
        return Labeling.from_mapping(self.root, num_vertices)

    @classmethod
    def from_model(cls, labeling: Labeling) -> "LabelingFile":
        return cls(labeling.as_mapping())
