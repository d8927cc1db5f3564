"""Planar quasi-isometric models of string graphs with checkable certificates."""

from .plane import INF, MapError, PlaneMap, TopologyError
from .rig import CertificateError, FamilyError, Impression, build_rig

__all__ = [
    "INF",
    "CertificateError",
    "FamilyError",
    "Impression",
    "MapError",
    "PlaneMap",
    "TopologyError",
    "build_rig",
]

__version__ = "0.1.0"
