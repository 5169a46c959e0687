"""Flags shared by the run commands and the config they resolve to."""
import argparse
import json
from typing import Any, Dict

from pydantic import ValidationError

from hardnesslab.core.config import settings
from hardnesslab.core.errors import ParameterError
from hardnesslab.repositories import ClassifierRepository, DatasetRepository, InstanceRepository, ReportRepository
from hardnesslab.repositories._files import read_json
from hardnesslab.schemas.run_config import ParamsSpec, RunConfig
from hardnesslab.services.experiment_service import ExperimentService

# flag dest -> RunConfig field
PATH_FLAGS = {
    "instance": "instance_path",
    "labeling": "labeling_path",
    "params": "params_path",
    "coeffs": "coeffs_path",
}
GENERATOR_FLAGS = {
    "vertices": "num_vertices",
    "edges": "num_edges",
    "k": "k",
    "M": "M",
    "m": "m",
    "d": "d",
}
PLAIN_FLAGS = (
    "seed", "n", "trials", "workers", "out", "report", "csv", "sampler", "with_transcript", "method",
    "ell", "train", "test", "epochs", "tau", "K", "edge", "vertex", "repeats", "check",
)


def get_service() -> ExperimentService:
    return ExperimentService(InstanceRepository(), DatasetRepository(), ClassifierRepository(), ReportRepository())


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration; flags override it")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n", type=int, help="number of sampled points")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--instance", help="instance JSON file")
    parser.add_argument("--labeling", help="labeling JSON file")
    parser.add_argument("--params", help="parameter JSON file")
    parser.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override one gadget parameter"
    )
    parser.add_argument("--out", help="artifact output path")
    parser.add_argument("--report", help="JSON report path")
    parser.add_argument("--csv", help="CSV flattening of the report rows")


def add_coefficient_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--coeffs", help="coefficient bundle or halfspace JSON")
    parser.add_argument("--tau", type=float)
    parser.add_argument("--K", type=int)
    parser.add_argument("--edge", type=int)


def _override(item: str) -> tuple:
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ParameterError(f"--set expects KEY=VALUE, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def build_config(args: argparse.Namespace) -> RunConfig:
    """defaults < LAB_* environment < --config file < flags."""
    data: Dict[str, Any] = {"seed": settings.DEFAULT_SEED, "workers": settings.WORKERS}
    if getattr(args, "config", None):
        loaded = read_json(args.config)
        if not isinstance(loaded, dict):
            raise ParameterError(f"{args.config} must hold a JSON object")
        data = _merge(data, loaded)

    for flag, field in PATH_FLAGS.items():
        if getattr(args, flag, None) is not None:
            data[field] = getattr(args, flag)
    for flag in PLAIN_FLAGS:
        value = getattr(args, flag, None)
        if value is not None and value is not False:
            data[flag] = value
    instance = {field: getattr(args, flag) for flag, field in GENERATOR_FLAGS.items() if getattr(args, flag, None) is not None}
    if getattr(args, "random", False):
        instance["planted"] = False
    if instance:
        data = _merge(data, {"instance": instance})
    overrides = dict(_override(item) for item in getattr(args, "set", []))
    if overrides:
        # --set adds to the effective override table instead of replacing it
        current = data.get("params", {}).get("overrides", ParamsSpec().overrides)
        data = _merge(data, {"params": {"overrides": {**current, **overrides}}})
    data["command"] = args.command

    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise ParameterError(f"invalid configuration at {where}: {first['msg']}") from exc


def run_command(args: argparse.Namespace):
    return get_service().run(build_config(args))
