import csv
from pathlib import Path
from typing import Optional

from hardnesslab.repositories._files import PathLike, parse, read_json, write_json
from hardnesslab.schemas.report import CheckResult, RunReport

CSV_COLUMNS = list(CheckResult(name="").row())


class ReportRepository:
    def write(self, report: RunReport, path: PathLike, csv_path: Optional[PathLike] = None) -> Path:
        target = write_json(path, report.model_dump(mode="json"))
        if csv_path is not None:
            self.write_csv(report, csv_path)
        return target

    def write_csv(self, report: RunReport, path: PathLike) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for result in report.results:
                writer.writerow(result.row())
        return target

    def load(self, path: PathLike) -> RunReport:
        return parse(RunReport, read_json(path), path)
