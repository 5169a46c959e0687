import json
from pathlib import Path
from typing import Iterable, Iterator, List

from pydantic import ValidationError

from hardnesslab.core.errors import FormatError
from hardnesslab.models.point import SamplePoint
from hardnesslab.repositories._files import PathLike
from hardnesslab.schemas.dataset import PointRecord


class DatasetRepository:
    """JSON Lines datasets: one point per line."""

    def write(self, points: Iterable[SamplePoint], path: PathLike, with_transcript: bool = False) -> int:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with open(target, "w", encoding="utf-8") as fh:
            for point in points:
                record = PointRecord.from_model(point, with_transcript)
                fh.write(json.dumps(record.model_dump(mode="json", exclude_none=True), sort_keys=True))
                fh.write("\n")
                count += 1
        return count

    def iter_points(self, path: PathLike) -> Iterator[SamplePoint]:
        try:
            fh = open(path, encoding="utf-8")
        except OSError as exc:
            raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
        with fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield PointRecord.model_validate_json(line).to_model()
                except ValidationError as exc:
                    raise FormatError(f"{path}:{lineno}: {exc.errors()[0]['msg']}") from exc

    def read(self, path: PathLike) -> List[SamplePoint]:
        return list(self.iter_points(path))
