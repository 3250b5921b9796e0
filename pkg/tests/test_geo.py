"""Tests for the local latitude/longitude mapping."""

import math

import numpy as np
import pytest

from src.core.geo import GeoAnchor, camera_position_gps, gps_to_world, world_to_gps
from src.core.projective import Pose, WorldPoint, camera_matrix
from src.utils.exceptions import InvalidParameterError, UnsupportedLatitudeError


@pytest.fixture
def anchor():
    return GeoAnchor(latitude=-64.77, longitude=-64.05, bearing=30.0)


def test_origin_maps_to_the_anchor(anchor):
    assert world_to_gps(anchor, WorldPoint(0.0, 0.0)) == pytest.approx((-64.77, -64.05))


def test_one_kilometre_north_at_the_equator():
    lat, lon = world_to_gps(GeoAnchor(0.0, 10.0), WorldPoint(0.0, 1000.0))
    assert lat == pytest.approx(0.0089932, abs=1e-7)
    assert lon == pytest.approx(10.0)


def test_longitude_degrees_shrink_with_latitude():
    _, lon = world_to_gps(GeoAnchor(60.0, 0.0), WorldPoint(1000.0, 0.0))
    assert lon == pytest.approx(2 * math.degrees(1000.0 / 6_371_000.0), rel=1e-9)


def test_round_trip(anchor):
    rng = np.random.default_rng(11)
    for x1, x2 in rng.uniform(-5000.0, 5000.0, size=(1000, 2)):
        back = gps_to_world(anchor, *world_to_gps(anchor, WorldPoint(x1, x2)))
        assert (back.x1, back.x2) == pytest.approx((x1, x2), abs=1e-6)
        assert back.x3 == 0.0


def test_bearing_turns_the_frame():
    north = WorldPoint(0.0, 500.0)
    east_facing = GeoAnchor(45.0, 7.0, bearing=90.0)
    point = gps_to_world(east_facing, *world_to_gps(GeoAnchor(45.0, 7.0), north))
    # +y now points east, so true north lies along -x
    assert point.x1 == pytest.approx(-500.0, abs=1e-6)
    assert point.x2 == pytest.approx(0.0, abs=1e-6)


def test_rotating_bearing_and_points_together_changes_nothing():
    rng = np.random.default_rng(2)
    for x1, x2 in rng.uniform(-2000.0, 2000.0, size=(50, 2)):
        bearing = rng.uniform(-180.0, 180.0)
        c, s = math.cos(math.radians(bearing)), math.sin(math.radians(bearing))
        turned = WorldPoint(c * x1 - s * x2, s * x1 + c * x2)
        expected = world_to_gps(GeoAnchor(10.0, 20.0), WorldPoint(x1, x2))
        assert world_to_gps(GeoAnchor(10.0, 20.0, bearing), turned) == pytest.approx(expected, abs=1e-12)


def test_longitude_wraps_at_the_date_line():
    _, lon = world_to_gps(GeoAnchor(0.0, 179.999), WorldPoint(1000.0, 0.0))
    assert -180.0 < lon < -179.99


def test_pole_is_unsupported():
    near_pole = GeoAnchor(89.95, 0.0)
    with pytest.raises(UnsupportedLatitudeError):
        world_to_gps(near_pole, WorldPoint(1.0, 1.0))
    with pytest.raises(UnsupportedLatitudeError):
        gps_to_world(near_pole, 89.95, 0.0)


@pytest.mark.parametrize("latitude", [90.0, -91.0, float("nan")])
def test_invalid_anchor(latitude):
    with pytest.raises(InvalidParameterError):
        GeoAnchor(latitude, 0.0)


def test_distance_limit(anchor):
    with pytest.raises(InvalidParameterError):
        world_to_gps(anchor, WorldPoint(0.0, 150_000.0))
    with pytest.raises(InvalidParameterError):
        gps_to_world(anchor, anchor.latitude + 2.0, anchor.longitude)


def test_camera_position(reference_intrinsics, anchor):
    cam = camera_matrix(reference_intrinsics, Pose(height=20.0, tilt=80.0, offset_x=-100.0))
    expected = world_to_gps(anchor, WorldPoint(100.0, 0.0))
    assert camera_position_gps(anchor, cam) == pytest.approx(expected, abs=1e-12)
