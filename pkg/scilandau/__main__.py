###############################################################################
#                                                                             #
#    This program is free software: you can redistribute it and/or modify     #
#    it under the terms of the GNU General Public License as published by     #
#    the Free Software Foundation, either version 3 of the License, or        #
#    (at your option) any later version.                                      #
#                                                                             #
#    This program is distributed in the hope that it will be useful,          #
#    but WITHOUT ANY WARRANTY; without even the implied warranty of           #
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the            #
#    GNU General Public License for more details.                             #
#                                                                             #
#    You should have received a copy of the GNU General Public License        #
#    along with this program. If not, see <http://www.gnu.org/licenses/>.     #
#                                                                             #
###############################################################################

import argparse
import sys

from scilandau import __version__
from scilandau import harness
from scilandau.errors import ConfigError

COMMANDS = {'simulate-memory': 'memory', 'simulate-landau': 'landau', 'converge': 'converge',
            'kernel-check': 'kernel-check', 'stationarity': 'stationarity'}


def print_help():
    lines = ['scilandau <command> [--config FILE] [--out DIR] [--threads N] [--seedless]',
             'Commands:',
             '  simulate-memory   Integrate the memory equation for one eps.',
             '  simulate-landau   Integrate the Landau equation.',
             '  converge          Memory runs for a decreasing eps list against one Landau run.',
             '  kernel-check      Compare closed-form kernels against quadrature oracles.',
             '  stationarity      Residual of runs started at the Maxwellian.',
             'Exit status: 0 ok, 2 bad configuration, 3 solver abort, 4 acceptance check failed.',
             '-v Print the version.']
    print('\n'.join(lines))


def run(args):
    text = '{}'
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    config = harness.parse_config(text, COMMANDS[args.command])
    return harness.run(config, out_dir=args.out, threads=args.threads, seedless=args.seedless)


def gen_parser():
    parser = argparse.ArgumentParser(description='scilandau')
    commands = parser.add_subparsers(dest='command')
    for name in COMMANDS:
        command = commands.add_parser(name)
        command.add_argument('--config', type=str, default=None, help='JSON configuration document.')
        command.add_argument('--out', type=str, default=None, help='Output folder (overrides "output").')
        command.add_argument('--threads', type=int, default=None, help='FFT worker threads, results do not '
                                                                       'depend on it.')
        command.add_argument('--seedless', action='store_true',
                             help='Assert a run without random numbers; recorded in the manifest. Takes no value.')
    return parser


def main(args=None):
    argv = sys.argv[1:] if args is None else list(args)
    if not argv:
        print_help()
        sys.exit(harness.EXIT_CONFIG)
    if argv[0] in {'-v', '--v', '-version', '--version'}:
        print(f'scilandau v{__version__}')
        sys.exit(0)
    print(f'scilandau v{__version__}')
    parsed = gen_parser().parse_args(argv)
    if parsed.command is None:
        print_help()
        sys.exit(harness.EXIT_CONFIG)
    try:
        status = run(parsed)
    except ConfigError as e:
        print(f'Configuration rejected: {e}', file=sys.stderr)
        status = harness.EXIT_CONFIG
    except OSError as e:
        print(f'Could not read the configuration: {e}', file=sys.stderr)
        status = harness.EXIT_CONFIG
    sys.exit(status)


if __name__ == "__main__":
    main()
