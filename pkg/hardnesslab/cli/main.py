import json
import logging
import sys
from typing import List, Optional

from hardnesslab.cli import build_parser
from hardnesslab.core.config import settings
from hardnesslab.core.errors import LabError
from hardnesslab.core.logging import configure_logging

logger = logging.getLogger("hardnesslab.cli")


def main(argv: Optional[List[str]] = None) -> int:
    """0 when every check passes, 1 when one fails, 2 on usage errors."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or settings.LOG_LEVEL, settings.LOG_FILE)
    try:
        report = args.handler(args)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    table = [result.row() for result in report.results]
    print(json.dumps({"command": report.command, "passed": report.passed, "results": table}, indent=2))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
