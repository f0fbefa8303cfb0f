"""
Shared argument parsing and error mapping for the geodubins commands
"""
import csv
import io
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from django.core.management.base import BaseCommand, CommandError
from scipy.spatial.transform import Rotation

from geodubins.exceptions import GeoDubinsError, InfeasibleError, InvalidInputError
from geodubins.serializers import decode_curve, dumps, encode_curve
from geodubins.sphere_core import IDENTITY, is_rotation, normalize, rotation_about_axis

logger = logging.getLogger(__name__)

EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
REPAIR_TOL = 1e-6


def parse_floats(text: str, name: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError as e:
        raise InvalidInputError(f"{name}: {str(e)}") from e
    if not all(math.isfinite(v) for v in values):
        raise InvalidInputError(f"{name}: values must be finite")
    return values


def parse_rotation(text: str) -> np.ndarray:
    """'r11,...,r33' (row-major) or 'axis-angle:x,y,z,angle'"""
    if text.startswith('axis-angle:'):
        values = parse_floats(text[len('axis-angle:'):], '--q')
        if len(values) != 4:
            raise InvalidInputError("--q axis-angle needs x,y,z,angle")
        return rotation_about_axis(normalize(values[:3]), values[3])
    values = parse_floats(text, '--q')
    if len(values) != 9:
        raise InvalidInputError(f"--q needs 9 matrix entries, got {len(values)}")
    matrix = np.array(values).reshape(3, 3)
    if not is_rotation(matrix, tol=REPAIR_TOL):
        raise InvalidInputError("--q is not a rotation matrix")
    return Rotation.from_matrix(matrix).as_matrix()


def csv_text(header: List[str], rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


class GeodubinsCommand(BaseCommand):
    """Base for commands that print JSON and exit 2 on bad input, 3 when infeasible"""

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=0, help='Seed for any random sampling')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def add_rho0(self, parser, required: bool = True):
        parser.add_argument('--rho0', type=float, required=required, help='Curvature bound radius')

    def add_q(self, parser, required: bool = True):
        parser.add_argument('--q', type=str, required=required,
                            help="End frame: 9 reals row-major or 'axis-angle:x,y,z,angle'")

    def handle(self, *args, **options):
        self.rng = np.random.default_rng(options['seed'])
        try:
            self.run(**options)
        except InfeasibleError as e:
            logger.error(f"{self.command_name()} infeasible: {str(e)} {e.reasons}", exc_info=True)
            raise CommandError(f"infeasible: {str(e)}", returncode=EXIT_INFEASIBLE)
        except GeoDubinsError as e:
            logger.error(f"{self.command_name()} failed: {str(e)}", exc_info=True)
            raise CommandError(str(e), returncode=EXIT_INVALID)

    def run(self, **options):
        raise NotImplementedError

    def command_name(self) -> str:
        return self.__class__.__module__.rsplit('.', 1)[-1]

    def rotation(self, text: Optional[str]) -> np.ndarray:
        return IDENTITY.copy() if text is None else parse_rotation(text)

    def emit(self, payload: Dict):
        self.stdout.write(dumps(payload))

    def read_curve(self, path: str):
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise InvalidInputError(f"Cannot read {path}: {str(e)}") from e
        return decode_curve(text)

    def write_text(self, path: str, text: str):
        try:
            Path(path).write_text(text)
        except OSError as e:
            raise InvalidInputError(f"Cannot write {path}: {str(e)}") from e

    def write_csv(self, path: str, header: List[str], rows):
        self.write_text(path, csv_text(header, rows))

    def write_curve(self, path: str, curve, rho0: Optional[float] = None, metadata: Optional[Dict] = None):
        self.write_text(path, encode_curve(curve, rho0, metadata))
        logger.info(f"Wrote {len(curve)} arcs to {path}")
