from hardnesslab.cli.common import add_coefficient_flags, add_run_flags, run_command

CHECKS = ("lo", "block-lo", "berry-esseen", "noisy-mass", "variance", "deviation", "all")


def register(subparsers) -> None:
    crit = subparsers.add_parser("critindex", help="critical indices, niceness and decoding conditions of one edge")
    add_run_flags(crit)
    add_coefficient_flags(crit)
    crit.set_defaults(handler=run_command)

    trunc = subparsers.add_parser("truncate", help="truncate coefficients and measure the disagreement")
    add_run_flags(trunc)
    add_coefficient_flags(trunc)
    trunc.add_argument("--vertex", type=int, help="truncate a single vertex")
    trunc.set_defaults(handler=run_command)

    anti = subparsers.add_parser("anticonc", help="small-ball, Berry-Esseen and coupled-pair checks")
    add_run_flags(anti)
    add_coefficient_flags(anti)
    anti.add_argument("--check", choices=CHECKS)
    anti.set_defaults(handler=run_command)

    dec = subparsers.add_parser("decode", help="decode coefficients into labelings and score them")
    add_run_flags(dec)
    add_coefficient_flags(dec)
    dec.add_argument("--repeats", type=int)
    dec.set_defaults(handler=run_command)
