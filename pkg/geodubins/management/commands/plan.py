"""
Shortest bounded-curvature path between two frames
"""
import logging

from geodubins.dubins import shortest_path

from ._base import GeodubinsCommand

logger = logging.getLogger(__name__)


class Command(GeodubinsCommand):
    help = 'Plan the shortest CSC/CCC path from --p to --q with curvature radius --rho0'

    def add_command_arguments(self, parser):
        self.add_rho0(parser)
        self.add_q(parser)
        parser.add_argument('--p', type=str, default=None, help='Start frame (default identity)')
        parser.add_argument('--out', type=str, default=None, help='Write the curve document here')

    def run(self, **options):
        rho0 = options['rho0']
        P = self.rotation(options['p'])
        Q = self.rotation(options['q'])
        solution = shortest_path(P, Q, rho0)
        metadata = solution.metadata()
        logger.info(f"Planned {metadata['type']} {metadata['case']} of length {solution.length:.12f}")
        if options['out']:
            self.write_curve(options['out'], solution.curve, rho0, metadata)
        self.emit({**metadata, 'arcs': len(solution.curve), 'out': options['out']})
