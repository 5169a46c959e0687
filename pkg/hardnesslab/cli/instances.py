from hardnesslab.cli.common import add_run_flags, run_command


def register(subparsers) -> None:
    gen = subparsers.add_parser("gen-instance", help="build a planted or random Label Cover instance")
    add_run_flags(gen)
    gen.add_argument("--vertices", type=int)
    gen.add_argument("--edges", type=int)
    gen.add_argument("--k", type=int)
    gen.add_argument("--M", type=int)
    gen.add_argument("--m", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("--random", action="store_true", help="no planted labeling")
    gen.set_defaults(handler=run_command)

    derive = subparsers.add_parser("derive-params", help="derive (and optionally override) the parameter tuple")
    add_run_flags(derive)
    derive.set_defaults(handler=run_command)
