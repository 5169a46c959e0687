import json
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field


class CheckResult(BaseModel):
    name: str
    estimate: Optional[float] = None
    ci95: Optional[Tuple[float, float]] = None
    bound: Optional[float] = None
    bound_vacuous: bool = False
    passed: Optional[bool] = None
    trials: Optional[int] = None
    details: Dict[str, Any] = Field(default_factory=dict)

    def row(self) -> Dict[str, Any]:
        """Flat view for CSV export."""
        low, high = self.ci95 if self.ci95 else (None, None)
        return {
            "name": self.name,
            "estimate": self.estimate,
            "ci_low": low,
            "ci_high": high,
            "bound": self.bound,
            "bound_vacuous": self.bound_vacuous,
            "passed": self.passed,
            "trials": self.trials,
        }


class RunReport(BaseModel):
    command: str
    git_describe: str
    seed: int
    params: Optional[Dict[str, Any]] = None
    paper_faithful: bool = False
    config: Dict[str, Any]
    created_at: datetime
    passed: bool = True
    results: List[CheckResult] = Field(default_factory=list)

    def numbers(self) -> List[Dict[str, Any]]:
        """Result rows in their JSON form; equal across reruns of one config."""
        return json.loads(json.dumps([r.model_dump(mode="json") for r in self.results], sort_keys=True))
