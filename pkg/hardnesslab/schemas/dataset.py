from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel

from hardnesslab.models.point import SamplePoint, Transcript


class PointRecord(BaseModel):
    """One JSON Lines row of a dataset file."""

    a: Literal[0, 1]
    edge: int = -1
    x: List[Tuple[int, int, int]]
    y: List[Tuple[int, int, int]]
    transcript: Optional[dict] = None

    def to_model(self) -> SamplePoint:
        transcript = Transcript.from_dict(self.transcript) if self.transcript else None
        return SamplePoint(
            a=self.a,
            x=frozenset(self.x),
            y=frozenset(self.y),
            edge_id=self.edge,
            transcript=transcript,
        )

    @classmethod
    def from_model(cls, point: SamplePoint, with_transcript: bool = False) -> "PointRecord":
        transcript = None
        if with_transcript and point.transcript is not None:
            transcript = point.transcript.to_dict()
        return cls(
            a=point.a,
            edge=point.edge_id,
            x=sorted(point.x),
            y=sorted(point.y),
            transcript=transcript,
        )
