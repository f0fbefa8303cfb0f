"""
Index numbers and hypotheses of an end frame
"""
from geodubins.config_index import index_report
from geodubins.serializers import IndexReportSerializer

from ._base import GeodubinsCommand


class Command(GeodubinsCommand):
    help = 'Report L_i, D_i, their truncations, n_Q and the hypotheses h1-h4 for --q'

    def add_command_arguments(self, parser):
        self.add_rho0(parser)
        self.add_q(parser)

    def run(self, **options):
        report = index_report(self.rotation(options['q']), options['rho0'])
        self.emit(IndexReportSerializer(report.as_dict()).data)
