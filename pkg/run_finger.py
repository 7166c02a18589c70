import argparse
import logging
import os
import sys

from harness.commands import cmd_gen_dataset, cmd_run, cmd_train_eval, cmd_verify
from stability.logistic import DEFAULT_EPOCHS, DEFAULT_L2, DEFAULT_LR
from utils.config import LOG_LEVEL_ENV, load_env
from utils.error_handler import EXIT_FAILURE
from utils.logger import setup_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Finger contact-force-direction control in simulation")
    parser.add_argument('--log-level', default=None, help=f"logging level (default ${LOG_LEVEL_ENV} or INFO)")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('run', help='run scenario(s) and write RunLog CSV + summary')
    p.add_argument('scenario', nargs='+')
    p.add_argument('--out', default=None, help='RunLog path (a directory when several scenarios are given)')
    p.add_argument('--seed', type=int, default=None, help='overrides the scenario seed')
    p.add_argument('--jobs', type=int, default=1)
    p.add_argument('--k-theta-scale', type=float, default=None, help='multiply K_theta')
    p.add_argument('--tactile-log', action='store_true', help='also write the taxel readings next to each RunLog')

    p = sub.add_parser('gen-dataset', help='simulate a scenario set into a windowed feature dataset')
    p.add_argument('scenario_set')
    p.add_argument('--out', default=None)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--jobs', type=int, default=1)

    p = sub.add_parser('train-eval', help='train the stability model on an 80/20 split and evaluate')
    p.add_argument('dataset')
    p.add_argument('--out', default=None, help='model file path')
    p.add_argument('--seed', type=int, default=0, help='split and initialization seed')
    p.add_argument('--shuffle-labels', action='store_true', help='chance-level control')
    p.add_argument('--l2', type=float, default=DEFAULT_L2)
    p.add_argument('--epochs', type=int, default=DEFAULT_EPOCHS)
    p.add_argument('--lr', type=float, default=DEFAULT_LR)

    p = sub.add_parser('verify', help='check a RunLog against the closed-loop invariants')
    p.add_argument('runlog')
    return parser


def main(argv=None) -> int:
    load_env()
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or os.getenv(LOG_LEVEL_ENV, "INFO"))
    try:
        if args.command == 'run':
            return cmd_run(args.scenario, args.out, args.seed, args.jobs, args.k_theta_scale, args.tactile_log)
        if args.command == 'gen-dataset':
            return cmd_gen_dataset(args.scenario_set, args.out, args.seed, args.jobs)
        if args.command == 'train-eval':
            return cmd_train_eval(args.dataset, args.out, args.seed, args.shuffle_labels, args.l2, args.epochs, args.lr)
        return cmd_verify(args.runlog)
    except Exception as e:
        logging.getLogger(__name__).exception("unexpected failure: %s", e)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
