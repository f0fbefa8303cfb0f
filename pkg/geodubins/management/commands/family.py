"""
Evaluate the parametrized family of curves for an end frame
"""
import itertools
import logging
import math
from pathlib import Path

import numpy as np

from geodubins.exceptions import InvalidInputError
from geodubins.family_generator import FamilyParams, f_bar, family_grid
from geodubins.serializers import dumps

from ._base import GeodubinsCommand, parse_floats

logger = logging.getLogger(__name__)


class Command(GeodubinsCommand):
    help = 'Build family curves for --q at one parameter vector (--x), a grid (--grid) or random draws (--random)'

    def add_command_arguments(self, parser):
        self.add_q(parser)
        self.add_rho0(parser)
        parser.add_argument('--rho-tilde', dest='rho_tilde', type=float, default=None,
                            help='Control circle radius (default rho0 + delta0/2)')
        choice = parser.add_mutually_exclusive_group(required=True)
        choice.add_argument('--x', type=str, help='Comma-separated parameters x_1..x_nQ')
        choice.add_argument('--grid', type=int, help='Values per coordinate in [-pi, pi]')
        choice.add_argument('--random', type=int, help='Number of uniform draws in [-pi, pi]^nQ')
        parser.add_argument('--out', type=str, default=None,
                            help='Curve file for --x, directory for --grid and --random')

    def run(self, **options):
        rho0 = options['rho0']
        params = FamilyParams.from_configuration(self.rotation(options['q']), rho0, options['rho_tilde'])
        summary = {'n_Q': params.n_q, 'rho_tilde': params.rho_tilde, 'delta0': params.delta0,
                   'varsigma': params.varsigma}
        if options['x'] is not None:
            x = parse_floats(options['x'], '--x')
            curve = f_bar(params, x)
            if options['out']:
                self.write_curve(options['out'], curve, rho0, {'x': x, **summary})
            self.emit({**summary, 'x': x, 'length': curve.length, 'arcs': len(curve), 'out': options['out']})
            return
        points = self._points(params.n_q, options)
        if not options['out']:
            raise InvalidInputError("--out directory is required with --grid or --random")
        out = Path(options['out'])
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise InvalidInputError(f"Cannot create {out}: {str(e)}") from e
        curves = family_grid(params, points)
        index = []
        for i, (x, curve) in enumerate(zip(points, curves)):
            name = f"x_{i}.json"
            self.write_curve(str(out / name), curve, rho0, {'x': x, **summary})
            index.append({'file': name, 'x': x, 'length': curve.length})
        self.write_text(str(out / 'index.json'), dumps({**summary, 'curves': index}))
        logger.info(f"Wrote {len(index)} family curves to {out}")
        self.emit({**summary, 'count': len(index), 'out': str(out)})

    def _points(self, n_q: int, options):
        if options['grid'] is not None:
            if options['grid'] < 1:
                raise InvalidInputError(f"--grid must be positive, got {options['grid']}")
            values = [float(v) for v in np.linspace(-math.pi, math.pi, options['grid'])]
            return [list(x) for x in itertools.product(values, repeat=n_q)]
        if options['random'] < 1:
            raise InvalidInputError(f"--random must be positive, got {options['random']}")
        draws = self.rng.uniform(-math.pi, math.pi, size=(options['random'], n_q))
        return [[float(v) for v in row] for row in draws]
