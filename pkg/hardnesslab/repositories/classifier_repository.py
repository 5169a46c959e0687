from typing import List

from hardnesslab.models.classifier import Classifier, Halfspace
from hardnesslab.repositories._files import PathLike, parse, read_json, write_json
from hardnesslab.schemas.classifier import ClassifierDocument, CoefficientBundle, HalfspaceFile, classifier_to_file


class ClassifierRepository:
    def save(self, classifier: Classifier, path: PathLike) -> None:
        write_json(path, classifier_to_file(classifier).model_dump(mode="json"))

    def load(self, path: PathLike) -> Classifier:
        document = parse(ClassifierDocument, {"classifier": read_json(path)}, path)
        return document.classifier.to_model()

    def save_bundle(self, halfspaces: List[Halfspace], path: PathLike) -> None:
        bundle = CoefficientBundle(halfspaces=[HalfspaceFile.from_model(h) for h in halfspaces])
        write_json(path, bundle.model_dump(mode="json"))

    def load_bundle(self, path: PathLike) -> List[Halfspace]:
        """A coefficient bundle, or a single halfspace file read as a bundle of one."""
        data = read_json(path)
        if isinstance(data, dict) and data.get("type") == "halfspace":
            return [parse(HalfspaceFile, data, path).to_model()]
        return parse(CoefficientBundle, data, path).to_model()
