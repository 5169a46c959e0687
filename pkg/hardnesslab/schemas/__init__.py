# Schemas module - pydantic models for parameters, configuration, files and reports
from hardnesslab.schemas.params import GadgetParams
from hardnesslab.schemas.run_config import InstanceSpec, ParamsSpec, RunConfig
from hardnesslab.schemas.report import CheckResult, RunReport

__all__ = [
    "GadgetParams",
    "InstanceSpec",
    "ParamsSpec",
    "RunConfig",
    "CheckResult",
    "RunReport",
]
