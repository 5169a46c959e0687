from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple

Bit = Tuple[int, int, int]  # (vertex, big label, slot)


@dataclass(frozen=True)
class BlockDraw:
    """Structural draws for one small label j of a blocked distribution."""

    j: int
    b: int
    S: Tuple[int, ...]
    S_prime: Tuple[int, ...] = ()
    u_x: Optional[int] = None
    u_y: Optional[int] = None
    accepted: bool = False
    T: Tuple[int, ...] = ()
    T_prime: Tuple[int, ...] = ()
    # b and the noise of this block are common to both points of a coupled pair
    shared: bool = False

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "b": self.b,
            "S": list(self.S),
            "S_prime": list(self.S_prime),
            "u_x": self.u_x,
            "u_y": self.u_y,
            "accepted": self.accepted,
            "T": list(self.T),
            "T_prime": list(self.T_prime),
            "shared": self.shared,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BlockDraw":
        return cls(
            j=int(data["j"]),
            b=int(data["b"]),
            S=tuple(data.get("S", ())),
            S_prime=tuple(data.get("S_prime", ())),
            u_x=data.get("u_x"),
            u_y=data.get("u_y"),
            accepted=bool(data.get("accepted", False)),
            T=tuple(data.get("T", ())),
            T_prime=tuple(data.get("T_prime", ())),
            shared=bool(data.get("shared", False)),
        )


@dataclass(frozen=True)
class Transcript:
    a: int
    edge_id: int
    blocks: Tuple[BlockDraw, ...]
    fill_seed: int = 0

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "edge": self.edge_id,
            "fill_seed": self.fill_seed,
            "blocks": [block.to_dict() for block in self.blocks],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        return cls(
            a=int(data["a"]),
            edge_id=int(data["edge"]),
            fill_seed=int(data.get("fill_seed", 0)),
            blocks=tuple(BlockDraw.from_dict(b) for b in data.get("blocks", ())),
        )


@dataclass(frozen=True)
class SamplePoint:
    """Sparse boolean point: only set bits of the X and Y vectors are stored."""

    a: int
    x: FrozenSet[Bit]
    y: FrozenSet[Bit]
    edge_id: int = -1
    transcript: Optional[Transcript] = field(default=None, compare=False)

    def bits(self, side: str) -> FrozenSet[Bit]:
        return self.x if side == "X" else self.y

    def has(self, side: str, vertex: int, label: int, slot: int) -> bool:
        return (vertex, label, slot) in self.bits(side)

    @property
    def vertices(self) -> FrozenSet[int]:
        return frozenset(v for v, _, _ in self.x) | frozenset(v for v, _, _ in self.y)
