"""
Sectionwise shortening of a curve document
"""
import logging

from geodubins.serializers import ShorteningResultSerializer
from geodubins.shortening import ShorteningSchedule, classify_segments, shorten

from ._base import GeodubinsCommand

logger = logging.getLogger(__name__)


class Command(GeodubinsCommand):
    help = 'Shorten the curve in --in under curvature radius --rho0'

    def add_command_arguments(self, parser):
        parser.add_argument('--in', dest='in', type=str, required=True, help='Curve document')
        self.add_rho0(parser)
        parser.add_argument('--passes', type=int, default=None, help='Pass cap')
        parser.add_argument('--section', type=float, default=None, help='Section length (default pi sin rho0)')
        parser.add_argument('--trace', type=str, default=None, help='CSV of pass,offset,length')
        parser.add_argument('--out', type=str, default=None, help='Write the shortened curve here')

    def run(self, **options):
        rho0 = options['rho0']
        curve = self.read_curve(options['in'])
        schedule = ShorteningSchedule.for_radius(rho0, options['section'], options['passes'])
        result = shorten(curve, rho0, schedule)
        segments = classify_segments(result.curve, rho0)
        if options['trace']:
            rows = [[p, repr(o), repr(l)] for p, o, l in result.trace]
            self.write_csv(options['trace'], ['pass', 'offset', 'length'], rows)
        if options['out']:
            self.write_curve(options['out'], result.curve, rho0,
                             {'passes': result.passes, 'reason': result.reason, 'labels': segments.labels})
        payload = {'passes': result.passes, 'reason': result.reason, 'initial_length': curve.length,
                   'length': result.curve.length, 'segments': segments.segments,
                   'violations': segments.violations}
        self.emit(ShorteningResultSerializer(payload).data)
