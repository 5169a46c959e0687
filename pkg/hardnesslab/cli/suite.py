from hardnesslab.cli.common import add_run_flags, get_service, run_command


def _replay(args):
    return get_service().replay(args.report)


def register(subparsers) -> None:
    suite = subparsers.add_parser("lemma-suite", help="run every lemma check and tabulate the results")
    add_run_flags(suite)
    suite.add_argument("--repeats", type=int)
    suite.set_defaults(handler=run_command)

    replay = subparsers.add_parser("replay", help="re-run a report's embedded config and compare its numbers")
    replay.add_argument("--report", required=True, help="report to replay")
    replay.set_defaults(handler=_replay)
