# CLI module - argparse command groups
import argparse

from hardnesslab import __version__
from hardnesslab.cli import analysis, instances, sampling, suite


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardnesslab",
        description="Desk-scale experiments on the label-cover reduction for learning intersections of halfspaces.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="override LAB_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for group in (instances, sampling, analysis, suite):
        group.register(subparsers)
    return parser


__all__ = ["build_parser"]
