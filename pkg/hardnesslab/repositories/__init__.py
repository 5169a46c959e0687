# Repositories module - file-backed data access layer
from hardnesslab.repositories.classifier_repository import ClassifierRepository
from hardnesslab.repositories.dataset_repository import DatasetRepository
from hardnesslab.repositories.instance_repository import InstanceRepository
from hardnesslab.repositories.report_repository import ReportRepository

__all__ = ["InstanceRepository", "DatasetRepository", "ClassifierRepository", "ReportRepository"]
