"""
Serializers for curve documents and command reports
"""
import json
import math
from typing import Dict, List, Optional

import numpy as np
from django.conf import settings
from rest_framework import serializers

from .arcs_curves import ORIENTATIONS, OrientedArc, PiecewiseArcCurve
from .exceptions import ContractError, InvalidInputError

CENTER_TOL = 1e-9


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise serializers.ValidationError("Must be a finite number.")
    return value


class VectorField(serializers.ListField):
    def __init__(self, size: int, **kwargs):
        kwargs.setdefault('child', serializers.FloatField(validators=[_finite]))
        kwargs.setdefault('min_length', size)
        kwargs.setdefault('max_length', size)
        super().__init__(**kwargs)


class ArcSerializer(serializers.Serializer):
    center = VectorField(3)
    radius = serializers.FloatField(validators=[_finite])
    orientation = serializers.ChoiceField(choices=ORIENTATIONS)
    start_angle = serializers.FloatField(validators=[_finite])
    sweep = serializers.FloatField(validators=[_finite], min_value=0.0)

    def validate_center(self, value):
        deviation = abs(math.sqrt(sum(c * c for c in value)) - 1.0)
        if deviation > CENTER_TOL:
            raise serializers.ValidationError(f"Center is not a unit vector (|norm - 1| = {deviation:.3e}).")
        return value

    def validate_radius(self, value):
        if not 0.0 < value < math.pi:
            raise serializers.ValidationError("Radius must lie in (0, pi).")
        return value


class CurveDocumentSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField()
    rho0 = serializers.FloatField(allow_null=True, required=False, default=None, validators=[_finite])
    start_frame = VectorField(9)
    arcs = ArcSerializer(many=True)
    metadata = serializers.DictField(required=False, default=dict)

    def validate_schema_version(self, value):
        if value != settings.GEODUBINS_CONFIG['SCHEMA_VERSION']:
            raise serializers.ValidationError(f"Unsupported schema version {value}.")
        return value


class IndexReportSerializer(serializers.Serializer):
    L1 = serializers.FloatField()
    L2 = serializers.FloatField()
    D1 = serializers.FloatField()
    D2 = serializers.FloatField()
    Lbar1 = serializers.IntegerField()
    Lbar2 = serializers.IntegerField()
    Dbar1 = serializers.IntegerField()
    Dbar2 = serializers.IntegerField()
    n_Q = serializers.IntegerField(allow_null=True)
    branch = serializers.CharField(allow_null=True)
    h1 = serializers.BooleanField()
    h2 = serializers.BooleanField()
    h3 = serializers.BooleanField()
    h4 = serializers.BooleanField()


class CriticalSpecSerializer(serializers.Serializer):
    rho0 = serializers.FloatField(validators=[_finite])
    radii = serializers.ListField(child=serializers.FloatField(validators=[_finite]), min_length=1)
    signature = serializers.RegexField(r'^[+\-−]*$', allow_blank=True, required=False, default='')
    start_sweep = serializers.FloatField(validators=[_finite], required=False, default=0.5 * math.pi)
    end_sweep = serializers.FloatField(validators=[_finite], required=False, default=0.5 * math.pi)
    leading_sign = serializers.ChoiceField(choices=['+', '-'], required=False, default='+')


class CriticalReportSerializer(serializers.Serializer):
    items = serializers.DictField(child=serializers.BooleanField())
    signature = serializers.CharField(allow_blank=True)
    index = serializers.IntegerField()
    self_intersections = serializers.IntegerField()
    valid = serializers.BooleanField()


class ShorteningResultSerializer(serializers.Serializer):
    passes = serializers.IntegerField()
    reason = serializers.CharField()
    initial_length = serializers.FloatField()
    length = serializers.FloatField()
    segments = serializers.ListField(child=serializers.DictField())
    violations = serializers.ListField(child=serializers.IntegerField())


class ClassificationSerializer(serializers.Serializer):
    x = serializers.ListField(child=serializers.FloatField())
    epsilon = serializers.FloatField()
    index = serializers.IntegerField()
    v_gamma = serializers.ListField(child=serializers.FloatField())
    m_gamma = serializers.FloatField()
    hemispheric = serializers.BooleanField()
    degenerate = serializers.BooleanField()
    y = serializers.ListField(child=serializers.FloatField())
    n_Q = serializers.IntegerField()
    in_c0 = serializers.BooleanField()
    point = serializers.ListField(child=serializers.FloatField())


def _flatten(errors, prefix: str = '') -> List[str]:
    """DRF error tree -> ['arcs.1.orientation: ...']"""
    if isinstance(errors, dict):
        return [line for key, value in errors.items() for line in _flatten(value, f"{prefix}{key}.")]
    if isinstance(errors, list):
        if all(isinstance(e, str) for e in errors):
            return [f"{prefix.rstrip('.')}: {e}" for e in errors]
        return [line for k, value in enumerate(errors) if value for line in _flatten(value, f"{prefix}{k}.")]
    return [f"{prefix.rstrip('.')}: {errors}"]


def validated(serializer_class, data) -> Dict:
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise InvalidInputError('; '.join(_flatten(serializer.errors)))
    return serializer.validated_data


def curve_to_document(curve: PiecewiseArcCurve, rho0: Optional[float] = None,
                      metadata: Optional[Dict] = None) -> Dict:
    return {
        'schema_version': settings.GEODUBINS_CONFIG['SCHEMA_VERSION'],
        'rho0': rho0,
        'start_frame': [float(v) for v in np.asarray(curve.start_frame).ravel()],
        'arcs': [{'center': [float(c) for c in arc.center], 'radius': float(arc.radius),
                  'orientation': arc.orientation, 'start_angle': float(arc.start_angle),
                  'sweep': float(arc.sweep)} for arc in curve.arcs],
        'metadata': metadata or {},
    }


def document_to_curve(document: Dict) -> PiecewiseArcCurve:
    data = validated(CurveDocumentSerializer, document)
    arcs = [OrientedArc(np.array(a['center']), a['radius'], a['orientation'], a['start_angle'], a['sweep'])
            for a in data['arcs']]
    frame = np.array(data['start_frame']).reshape(3, 3)
    try:
        return PiecewiseArcCurve(frame, arcs, tol=settings.GEODUBINS_CONFIG['FRAME_TOL'])
    except ContractError as e:
        raise InvalidInputError(f"arcs: {str(e)}") from e


def dumps(payload: Dict) -> str:
    """Canonical JSON; floats use the shortest repr that reads back to the same double"""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)


def encode_curve(curve: PiecewiseArcCurve, rho0: Optional[float] = None, metadata: Optional[Dict] = None) -> str:
    return dumps(curve_to_document(curve, rho0, metadata))


def decode_curve(text: str) -> PiecewiseArcCurve:
    return document_to_curve(load_document(text))


def load_document(text: str) -> Dict:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"Curve document is not valid JSON: {str(e)}") from e
    if not isinstance(document, dict):
        raise InvalidInputError("Curve document must be a JSON object")
    return document
