from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class InstanceSpec(BaseModel):
    """Generator settings used when no instance file is given."""

    num_vertices: int = Field(16, ge=2)
    num_edges: int = Field(8, ge=1)
    k: int = Field(2, ge=1)
    M: int = Field(8, ge=1)
    m: int = Field(4, ge=1)
    d: int = Field(2, ge=1)
    planted: bool = True


class ParamsSpec(BaseModel):
    """Derivation inputs plus overrides applied on top of the derived tuple."""

    zeta: float = 0.25
    nu: float = 0.1
    ell: int = 1
    z: int = 1
    overrides: Dict[str, Any] = Field(
        default_factory=lambda: {
            "d": 2,
            "k": 2,
            "t": 1,
            "Q": 8,
            "tau": 0.1,
            "K": 4,
            "clamp_acceptance": True,
        }
    )


class RunConfig(BaseModel):
    """Effective configuration of one command; embedded in its report."""

    model_config = ConfigDict(extra="forbid")

    command: str = ""
    seed: int = Field(0, ge=0)
    n: int = Field(10_000, ge=1)
    trials: int = Field(10_000, ge=1)
    workers: int = Field(1, ge=1)

    instance: InstanceSpec = Field(default_factory=InstanceSpec)
    instance_path: Optional[str] = None
    labeling_path: Optional[str] = None
    params: ParamsSpec = Field(default_factory=ParamsSpec)
    params_path: Optional[str] = None

    # sample
    sampler: Literal["global", "basic", "simplified"] = "global"
    with_transcript: bool = False
    out: Optional[str] = None

    # probe
    method: Literal["perceptron", "averaged_perceptron", "logistic_sgd"] = "averaged_perceptron"
    ell: int = Field(1, ge=1, le=20)
    train: int = Field(10_000, ge=1)
    test: int = Field(10_000, ge=1)
    epochs: int = Field(5, ge=1)

    # critindex / truncate / anticonc / decode
    edge: int = Field(0, ge=0)
    vertex: Optional[int] = Field(None, ge=0)
    tau: Optional[float] = Field(None, gt=0.0, lt=1.0)
    K: Optional[int] = Field(None, ge=1)
    coeffs_path: Optional[str] = None
    repeats: int = Field(100, ge=1)

    # anticonc
    check: Literal["lo", "block-lo", "berry-esseen", "noisy-mass", "variance", "deviation", "all"] = "all"

    # reporting
    report: Optional[str] = None
    csv: Optional[str] = None
