"""
Uniform samples of a curve document as CSV
"""
from geodubins.exceptions import InvalidInputError

from ._base import GeodubinsCommand, csv_text

HEADER = ['t', 'x', 'y', 'z', 'tx', 'ty', 'tz']


class Command(GeodubinsCommand):
    help = 'Write t,x,y,z,tx,ty,tz samples of the curve in --in'

    def add_command_arguments(self, parser):
        parser.add_argument('--in', dest='in', type=str, required=True, help='Curve document')
        parser.add_argument('--n', type=int, default=200, help='Number of samples')
        parser.add_argument('--out', type=str, default=None, help='CSV path (default stdout)')

    def run(self, **options):
        if options['n'] < 2:
            raise InvalidInputError(f"--n must be at least 2, got {options['n']}")
        sampled = self.read_curve(options['in']).sample(options['n'])
        rows = [[repr(float(v)) for v in (t, *x, *tangent)]
                for t, x, tangent in zip(sampled.params, sampled.points, sampled.tangents)]
        if options['out']:
            self.write_csv(options['out'], HEADER, rows)
        else:
            self.stdout.write(csv_text(HEADER, rows), ending='')
