"""
Epsilon-index, G-coordinates and sphere point of a curve document
"""
from geodubins.classifier import classify, dense_sample_count
from geodubins.exceptions import InvalidInputError
from geodubins.serializers import ClassificationSerializer

from ._base import GeodubinsCommand


class Command(GeodubinsCommand):
    help = 'Classify the curve in --in relative to --q'

    def add_command_arguments(self, parser):
        parser.add_argument('--in', dest='in', type=str, required=True, help='Curve document')
        self.add_q(parser)
        self.add_rho0(parser)
        parser.add_argument('--epsilon', type=float, default=None, help='Band width (default rho0/10)')
        parser.add_argument('--samples', type=int, default=None, help='Sample count (default: dense enough)')

    def run(self, **options):
        rho0 = options['rho0']
        epsilon = options['epsilon'] if options['epsilon'] is not None else rho0 / 10.0
        if not epsilon > 0.0:
            raise InvalidInputError(f"epsilon = {epsilon} must be positive")
        curve = self.read_curve(options['in'])
        samples = options['samples'] or dense_sample_count(curve, epsilon)
        result = classify(curve.sample(samples), self.rotation(options['q']), rho0, epsilon)
        self.emit(ClassificationSerializer(result.as_dict()).data)
