from hardnesslab.cli.common import add_run_flags, run_command

SAMPLERS = ("global", "basic", "simplified")


def register(subparsers) -> None:
    sample = subparsers.add_parser("sample", help="draw a labelled dataset")
    add_run_flags(sample)
    sample.add_argument("--sampler", choices=SAMPLERS)
    sample.add_argument("--with-transcript", action="store_true")
    sample.set_defaults(handler=run_command)

    verify = subparsers.add_parser("verify-complete", help="accuracy of the planted 2-clause CNF")
    add_run_flags(verify)
    verify.set_defaults(handler=run_command)

    probe = subparsers.add_parser("probe", help="train halfspaces and a combiner, report accuracy")
    add_run_flags(probe)
    probe.add_argument("--sampler", choices=SAMPLERS)
    probe.add_argument("--method", choices=("perceptron", "averaged_perceptron", "logistic_sgd"))
    probe.add_argument("--ell", type=int, help="number of halfspaces")
    probe.add_argument("--train", type=int)
    probe.add_argument("--test", type=int)
    probe.add_argument("--epochs", type=int)
    probe.set_defaults(handler=run_command)
