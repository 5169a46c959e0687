import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

import numpy as np

Mass = Union[int, float]


@dataclass(frozen=True, eq=False)
class BlockVector:
    """Coefficients of one (side, vertex) organised as label -> length-Q block.

    Labels missing from ``blocks`` are zero blocks. ``num_labels`` is the
    ambient label count M when known.
    """

    blocks: Mapping[int, np.ndarray]
    owner: Optional[Tuple[str, int]] = None
    num_labels: Optional[int] = None
    _norms: Dict[int, Mass] = field(init=False, repr=False)

    def __post_init__(self):
        frozen = {}
        norms: Dict[int, Mass] = {}
        for label, block in self.blocks.items():
            arr = np.asarray(block)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite coefficient in block {label}")
            frozen[int(label)] = arr
            if np.issubdtype(arr.dtype, np.integer):
                norms[int(label)] = sum(int(c) * int(c) for c in arr.ravel())
            else:
                norms[int(label)] = math.fsum(float(c) * float(c) for c in arr.ravel())
        object.__setattr__(self, "blocks", frozen)
        object.__setattr__(self, "_norms", norms)

    @property
    def integral(self) -> bool:
        return all(isinstance(n, int) for n in self._norms.values())

    @property
    def labels(self) -> Tuple[int, ...]:
        return tuple(sorted(self.blocks))

    def norm_sq(self, label: int) -> Mass:
        return self._norms.get(label, 0)

    @property
    def norms_sq(self) -> Mapping[int, Mass]:
        return self._norms

    def mass(self, labels: Optional[Iterable[int]] = None) -> Mass:
        if labels is None:
            values = list(self._norms.values())
        else:
            values = [self._norms.get(i, 0) for i in labels]
        if all(isinstance(v, int) for v in values):
            return sum(values)
        return math.fsum(values)

    def without(self, labels: Iterable[int]) -> "BlockVector":
        drop = set(labels)
        return BlockVector(
            {i: b for i, b in self.blocks.items() if i not in drop}, self.owner, self.num_labels
        )

    def restricted(self, labels: Iterable[int]) -> "BlockVector":
        keep = set(labels)
        return BlockVector(
            {i: b for i, b in self.blocks.items() if i in keep}, self.owner, self.num_labels
        )

    def scaled(self, factor: float) -> "BlockVector":
        return BlockVector(
            {i: np.asarray(b, dtype=float) * factor for i, b in self.blocks.items()},
            self.owner,
            self.num_labels,
        )

    @classmethod
    def from_dense(cls, array, owner: Optional[Tuple[str, int]] = None) -> "BlockVector":
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise ValueError("dense block array must have shape (M, Q)")
        blocks = {i: arr[i] for i in range(arr.shape[0]) if np.any(arr[i] != 0)}
        return cls(blocks, owner, arr.shape[0])

    @classmethod
    def from_norms(cls, norms_sq: Iterable[float], owner: Optional[Tuple[str, int]] = None) -> "BlockVector":
        """One-slot blocks with the given squared norms (test and calibration fixtures)."""
        blocks = {i: np.array([math.sqrt(n)]) for i, n in enumerate(norms_sq)}
        return cls(blocks, owner, len(blocks))


def exact_gt(lhs: Mass, rhs: Mass, factor: Union[Fraction, float], rel_tol: float = 1e-9) -> bool:
    """lhs > factor·rhs, exactly for integer masses and with a relative tolerance otherwise."""
    if isinstance(lhs, int) and isinstance(rhs, int):
        return Fraction(lhs) > Fraction(factor) * rhs
    threshold = float(factor) * float(rhs)
    return float(lhs) > threshold + rel_tol * abs(threshold)


@dataclass(frozen=True)
class CriticalIndexReport:
    order: Tuple[int, ...]
    i_tau: int
    C_tau: FrozenSet[int]
    C_tau_leK: FrozenSet[int]
    tau: float
    K: int

    @property
    def regular(self) -> bool:
        return self.i_tau == 1

    @property
    def tail(self) -> FrozenSet[int]:
        return self.C_tau - self.C_tau_leK

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "i_tau": self.i_tau,
            "C_tau": sorted(self.C_tau),
            "C_tau_leK": sorted(self.C_tau_leK),
            "regular": self.regular,
            "tau": self.tau,
            "K": self.K,
        }
