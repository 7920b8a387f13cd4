"""Command-line front end: run configuration in, CSV out.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures. On error nothing is written.
"""

import argparse
import logging
import sys

from spdcfocus import __version__, configure_logging
from spdcfocus.commands import register_all
from spdcfocus.exceptions import ConfigError, NumericalError
from spdcfocus.export import write_csv
from spdcfocus.runconfig import load_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected an integer, got {text!r}') from None
    if value < 1:
        raise argparse.ArgumentTypeError('must be at least 1')
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True, metavar='PATH',
                        help='run configuration (INI, or a CSV written by this tool)')
    common.add_argument('--out', metavar='PATH',
                        help='output CSV; defaults to [output] path, else stdout')
    common.add_argument('--threads', type=_positive_int, metavar='N',
                        help='worker processes for scans (default: SPDC_WORKERS)')
    common.add_argument('--normalize', choices=('max', 'none'),
                        help='override [output] normalize')
    common.add_argument('--verbose', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(
        prog='spdcfocus',
        description='Focal-shift dependence of SPDC photon-pair coupling, spectra and purity.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)
    register_all(subparsers, common)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(verbose=args.verbose)

    try:
        run_config = load_run_config(args.config).with_overrides(
            normalize=args.normalize, objective=getattr(args, 'objective', None),
        )
        columns, rows = args.handler(run_config, args)
        write_csv(args.out or run_config.output_path, columns, rows, run_config)
    except ConfigError as exc:
        logger.error('Configuration error: %s', exc)
        return EXIT_CONFIG
    except OSError as exc:
        logger.error('Cannot write output: %s', exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        logger.error('Numerical failure in %s: %s', args.command, exc)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
