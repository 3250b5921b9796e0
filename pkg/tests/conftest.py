"""Shared fixtures: the reference 14 mm camera and small scratch-geometry helpers."""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.core.projective import Intrinsics, Pose, camera_matrix  # noqa: E402
from src.utils.constants import (  # noqa: E402
    REFERENCE_FOCAL_MM, REFERENCE_HEIGHT_M, REFERENCE_IMAGE_HEIGHT_PX, REFERENCE_IMAGE_WIDTH_PX,
    REFERENCE_SENSOR_HEIGHT_MM, REFERENCE_SENSOR_WIDTH_MM, REFERENCE_TILT_DEG
)

F_PIX = REFERENCE_FOCAL_MM / REFERENCE_SENSOR_WIDTH_MM * REFERENCE_IMAGE_WIDTH_PX


@pytest.fixture
def reference_intrinsics() -> Intrinsics:
    return Intrinsics(REFERENCE_FOCAL_MM, REFERENCE_SENSOR_WIDTH_MM, REFERENCE_SENSOR_HEIGHT_MM,
                      REFERENCE_IMAGE_WIDTH_PX, REFERENCE_IMAGE_HEIGHT_PX)


@pytest.fixture
def reference_pose() -> Pose:
    return Pose(height=REFERENCE_HEIGHT_M, tilt=REFERENCE_TILT_DEG)


@pytest.fixture
def reference_camera(reference_intrinsics, reference_pose):
    return camera_matrix(reference_intrinsics, reference_pose)


@pytest.fixture
def level_camera(reference_intrinsics):
    """Reference camera looking horizontally"""
    return camera_matrix(reference_intrinsics, Pose(height=20.0, tilt=90.0))


# ---------------------------------------------------------------------------
# Scratch geometry, written out independently of the package
# ---------------------------------------------------------------------------


def scratch_rotations(tilt, roll, heading):
    ct, st = math.cos(math.radians(tilt)), math.sin(math.radians(tilt))
    cr, sr = math.cos(math.radians(roll)), math.sin(math.radians(roll))
    ch, sh = math.cos(math.radians(heading)), math.sin(math.radians(heading))
    r_tilt = [[1, 0, 0], [0, ct, st], [0, -st, ct]]
    r_roll = [[cr, sr, 0], [-sr, cr, 0], [0, 0, 1]]
    r_heading = [[ch, sh, 0], [-sh, ch, 0], [0, 0, 1]]
    return np.array(r_tilt, float), np.array(r_roll, float), np.array(r_heading, float)


def scratch_camera_coords(pose, point):
    """Camera-frame coordinates, one rotation at a time"""
    r_tilt, r_roll, r_heading = scratch_rotations(pose.tilt, pose.roll, pose.heading)
    t = np.array([pose.offset_x, pose.offset_y, -pose.height])
    rotated = r_roll @ (r_tilt @ (r_heading @ np.asarray(point, float)))
    return rotated + r_tilt @ (r_heading @ t)


def scratch_project(intr, pose, point):
    x, y, z = scratch_camera_coords(pose, point)
    f = intr.focal_length / intr.sensor_width * intr.image_width
    return np.array([intr.image_width / 2 + f * x / z, intr.image_height / 2 + f * y / z]), z


def scratch_ray(intr, pose, pixel):
    """Camera centre and world direction of the viewing ray (roll 0)"""
    assert pose.roll == 0.0
    r_tilt, r_roll, r_heading = scratch_rotations(pose.tilt, pose.roll, pose.heading)
    rotation = r_roll @ r_tilt @ r_heading
    f = intr.focal_length / intr.sensor_width * intr.image_width
    u = (pixel[0] - intr.image_width / 2) / f
    v = (pixel[1] - intr.image_height / 2) / f
    # the camera looks along its negative z axis
    direction = rotation.T @ np.array([-u, -v, -1.0])
    center = np.array([-pose.offset_x, -pose.offset_y, pose.height])
    return center, direction


def scratch_intersect(center, direction, axis, value):
    lam = (value - center[axis]) / direction[axis]
    return center + lam * direction, lam
