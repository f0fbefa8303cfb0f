"""
Generate a critical curve from a JSON description
"""
import json
from pathlib import Path

from geodubins.config_index import CriticalSpec, generate_critical, validate_critical
from geodubins.exceptions import InvalidInputError
from geodubins.serializers import CriticalReportSerializer, CriticalSpecSerializer, validated

from ._base import GeodubinsCommand


class Command(GeodubinsCommand):
    help = 'Build the critical curve described by --spec and report its checks'

    def add_command_arguments(self, parser):
        parser.add_argument('--spec', type=str, required=True,
                            help='JSON with rho0, radii, signature, start_sweep, end_sweep, leading_sign')
        parser.add_argument('--out', type=str, default=None, help='Write the curve document here')

    def run(self, **options):
        try:
            raw = json.loads(Path(options['spec']).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidInputError(f"Cannot load {options['spec']}: {str(e)}") from e
        spec = CriticalSpec(**validated(CriticalSpecSerializer, raw))
        curve = generate_critical(spec)
        report = validate_critical(curve, spec.rho0)
        if options['out']:
            self.write_curve(options['out'], curve, spec.rho0,
                             {'signature': spec.signature, 'jump_string': spec.jump_string})
        payload = {'items': report.items, 'signature': report.signature, 'index': report.index,
                   'self_intersections': report.self_intersections, 'valid': report.valid}
        self.emit({**CriticalReportSerializer(payload).data, 'length': curve.length, 'out': options['out']})
