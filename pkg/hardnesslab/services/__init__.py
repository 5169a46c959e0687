# Services module - business logic layer
from hardnesslab.services.experiment_service import ExperimentService

__all__ = ["ExperimentService"]
