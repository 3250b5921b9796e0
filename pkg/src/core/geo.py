"""
Geo Anchor
Local equirectangular mapping between the metric world frame and latitude/longitude
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .projective import CameraMatrix, WorldPoint, camera_center
from ..utils.constants import EARTH_RADIUS_M, MAX_GEO_DISTANCE_M, MAX_GEO_LATITUDE_DEG
from ..utils.exceptions import InvalidParameterError, UnsupportedLatitudeError
from ..utils.helpers import normalize_angle, require_finite, rotate2d


@dataclass(frozen=True)
class GeoAnchor:
    """Geographic position of the world origin and compass bearing of its +y axis.

    The bearing is measured clockwise from true north; +x points 90 degrees
    clockwise of +y, so with bearing 0 the frame is (east, north).
    """

    latitude: float
    longitude: float
    bearing: float = 0.0

    def __post_init__(self):
        latitude = require_finite("latitude", self.latitude)
        if abs(latitude) >= 90.0:
            raise InvalidParameterError(f"latitude must lie strictly between -90 and 90, got {latitude}")
        object.__setattr__(self, "latitude", latitude)
        object.__setattr__(self, "longitude", normalize_angle(require_finite("longitude", self.longitude)))
        object.__setattr__(self, "bearing", require_finite("bearing", self.bearing))

    def _check_latitude(self) -> None:
        if abs(self.latitude) >= MAX_GEO_LATITUDE_DEG:
            raise UnsupportedLatitudeError(
                f"anchor latitude {self.latitude} is too close to a pole for the local approximation"
            )


def world_to_gps(anchor: GeoAnchor, point: WorldPoint) -> Tuple[float, float]:
    """(latitude, longitude) of a world point; x3 is ignored"""
    anchor._check_latitude()
    if math.hypot(point.x1, point.x2) > MAX_GEO_DISTANCE_M:
        raise InvalidParameterError(
            f"point ({point.x1:.1f}, {point.x2:.1f}) is more than {MAX_GEO_DISTANCE_M:.0f} m from the anchor"
        )
    # world (x1, x2) is (east, north) rotated counterclockwise by the bearing
    east, north = rotate2d(np.array([point.x1, point.x2]), -anchor.bearing)
    lat0 = math.radians(anchor.latitude)
    latitude = anchor.latitude + math.degrees(north / EARTH_RADIUS_M)
    longitude = anchor.longitude + math.degrees(east / (EARTH_RADIUS_M * math.cos(lat0)))
    return latitude, normalize_angle(longitude)


def gps_to_world(anchor: GeoAnchor, latitude: float, longitude: float) -> WorldPoint:
    """Ground point (x3 = 0) at a latitude/longitude"""
    anchor._check_latitude()
    latitude = require_finite("latitude", latitude)
    longitude = require_finite("longitude", longitude)
    lat0 = math.radians(anchor.latitude)
    north = math.radians(latitude - anchor.latitude) * EARTH_RADIUS_M
    east = math.radians(normalize_angle(longitude - anchor.longitude)) * EARTH_RADIUS_M * math.cos(lat0)
    if math.hypot(east, north) > MAX_GEO_DISTANCE_M:
        raise InvalidParameterError(
            f"({latitude}, {longitude}) is more than {MAX_GEO_DISTANCE_M:.0f} m from the anchor"
        )
    x1, x2 = rotate2d(np.array([east, north]), anchor.bearing)
    return WorldPoint(float(x1), float(x2), 0.0)


def camera_position_gps(anchor: GeoAnchor, cam: CameraMatrix) -> Tuple[float, float]:
    """(latitude, longitude) of the point on the ground below the optical centre"""
    center = camera_center(cam)
    return world_to_gps(anchor, WorldPoint(center.x1, center.x2, 0.0))
