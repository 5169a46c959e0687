from typing import Tuple

from hardnesslab.core.errors import FormatError
from hardnesslab.models.label_cover import LabelCoverInstance, Labeling
from hardnesslab.repositories._files import PathLike, parse, read_json, write_json
from hardnesslab.schemas.instance import InstanceFile, LabelingFile
from hardnesslab.schemas.params import GadgetParams


class InstanceRepository:
    def save(self, instance: LabelCoverInstance, path: PathLike) -> None:
        write_json(path, InstanceFile.from_model(instance).model_dump(mode="json"))

    def load(self, path: PathLike) -> LabelCoverInstance:
        document = parse(InstanceFile, read_json(path), path)
        try:
            instance = document.to_model()
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        problems = instance.violations()
        if problems:
            raise FormatError(f"{path}: {problems[0]}")
        return instance

    def save_labeling(self, labeling: Labeling, path: PathLike) -> None:
        write_json(path, LabelingFile.from_model(labeling).model_dump(mode="json"))

    def load_labeling(self, path: PathLike, instance: LabelCoverInstance) -> Labeling:
        document = parse(LabelingFile, read_json(path), path)
        try:
            labeling = document.to_model(instance.num_vertices)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        if any(not 0 <= label < instance.M for label in labeling.assignment):
            raise FormatError(f"{path}: labels must lie in [0, {instance.M})")
        return labeling

    def save_bundle(self, instance: LabelCoverInstance, labeling: Labeling, path: PathLike) -> Tuple[str, str]:
        """Instance at ``path`` and its labeling next to it as ``<stem>.labeling.json``."""
        instance_path = str(path)
        stem = instance_path[:-5] if instance_path.endswith(".json") else instance_path
        labeling_path = f"{stem}.labeling.json"
        self.save(instance, instance_path)
        self.save_labeling(labeling, labeling_path)
        return instance_path, labeling_path

    def save_params(self, params: GadgetParams, path: PathLike) -> None:
        write_json(path, params.model_dump(mode="json"))

    def load_params(self, path: PathLike) -> GadgetParams:
        return parse(GadgetParams, read_json(path), path)
