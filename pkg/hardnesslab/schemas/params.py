from pydantic import BaseModel, ConfigDict, Field, model_validator


class GadgetParams(BaseModel):
    """The reduction's parameter tuple.

    ``paper_faithful`` is true only for tuples produced by ``derive_params``
    without overrides. ``clamp_acceptance`` caps the zero-point acceptance
    probability at 1 instead of rejecting it.
    """

    model_config = ConfigDict(frozen=True)

    zeta: float = Field(..., gt=0.0, lt=0.5)
    nu: float = Field(0.1, gt=0.0, lt=0.5)
    ell: int = Field(1, ge=1)
    z: int = Field(1, ge=1)
    d: int = Field(..., ge=1)
    k: int = Field(..., ge=1)
    t: int = Field(..., ge=1)
    Q: int = Field(..., ge=1)
    tau: float = Field(..., gt=0.0, lt=1.0)
    K: int = Field(..., ge=1)
    J: float = Field(1.0, gt=0.0)
    paper_faithful: bool = False
    clamp_acceptance: bool = False

    @model_validator(mode="after")
    def _check_shape(self) -> "GadgetParams":
        if self.k % 2:
            raise ValueError(f"k must be even, got {self.k}")
        if self.t > self.k:
            raise ValueError(f"t={self.t} exceeds k={self.k}")
        return self

    @property
    def zero_accept(self) -> float:
        """Probability of the zero-point indicator gate, 1/(zeta(1-zeta)t)."""
        return 1.0 / (self.zeta * (1.0 - self.zeta) * self.t)

    @property
    def marginals_matched(self) -> bool:
        return self.zero_accept <= 1.0

    def override(self, **changes) -> "GadgetParams":
        data = self.model_dump()
        data.update(changes)
        data["paper_faithful"] = False
        return GadgetParams.model_validate(data)
