from __future__ import annotations

import argparse
import logging
import sys
from typing import TYPE_CHECKING, NoReturn

from retrodiff.cli import commands
from retrodiff.config import get_settings
from retrodiff.errors import RetrodiffError, UsageError
from retrodiff.observability import setup_tracing, shutdown_tracing

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_INTERNAL_ERROR = 2


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors raise :class:`UsageError` instead of exiting."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="retrodiff", description="Diffusion ensembles for single-step retrosynthesis")
    parser.add_argument("--log-level", default=None, help="Overrides RETRODIFF_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Train one model or an ensemble from a config file")
    train.add_argument("--config", required=True, help="Flat key=value config file")

    sample = sub.add_parser("sample", help="Rank candidate reactant sets for one product")
    sample.add_argument("--ckpt", nargs="+", required=True, help="One checkpoint per ensemble member")
    sample.add_argument("--product", required=True, help="Product SMILES")
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--n-aug", type=int, default=20, help="Randomly rooted product strings per model")
    sample.add_argument("--samples-per-aug", type=int, default=1)
    sample.add_argument(
        "--oracle-length", type=int, default=None, help="Use this reactant token length as noise length"
    )

    evaluate = sub.add_parser("eval", help="Top-k table of each member and the ensemble on a test file")
    evaluate.add_argument("--ckpt", nargs="+", required=True)
    evaluate.add_argument("--test", required=True, help="Reaction file, one reactants>>product per line")
    evaluate.add_argument("--mode", choices=sorted(commands.MODE_FLAGS), default="variant")
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--n-aug", type=int, default=20)
    evaluate.add_argument("--samples-per-aug", type=int, default=1)

    synth = sub.add_parser("synth", help="Write a synthetic atom-mapped reaction file")
    synth.add_argument("--out", required=True)
    synth.add_argument("--n", type=int, required=True, help="Number of reactions")
    synth.add_argument("--seed", type=int, default=0)
    return parser


def run(args: argparse.Namespace) -> None:
    settings = get_settings()
    if args.command == "train":
        manifest = commands.cmd_train(args.config)
        print("\n".join(manifest.checkpoints))
    elif args.command == "sample":
        report = commands.cmd_sample(
            args.ckpt,
            args.product,
            seed=args.seed,
            n_aug=args.n_aug,
            samples_per_aug=args.samples_per_aug,
            oracle_length=args.oracle_length,
        )
        sys.stdout.write(report)
    elif args.command == "eval":
        table = commands.cmd_eval(
            args.ckpt,
            args.test,
            mode=commands.MODE_FLAGS[args.mode],
            seed=args.seed,
            n_aug=args.n_aug,
            samples_per_aug=args.samples_per_aug,
            output_dir=settings.output_dir,
            progress=settings.progress,
        )
        sys.stdout.write(table)
    elif args.command == "synth":
        path = commands.cmd_synth(args.out, args.n, args.seed)
        print(path)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USER_ERROR
    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    setup_tracing(settings)
    try:
        run(args)
    except RetrodiffError as exc:
        if exc.user_error:
            logger.error("%s", exc)
            return EXIT_USER_ERROR
        logger.exception("internal error")
        return EXIT_INTERNAL_ERROR
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL_ERROR
    finally:
        shutdown_tracing()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
