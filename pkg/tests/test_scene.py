"""Tests for synthetic scenes, annotation and apparent-height sweeps."""

import logging

import numpy as np
import pytest

from conftest import scratch_intersect, scratch_ray
from src.core.projective import (
    ImagePoint, Intrinsics, Pose, WorldPoint, camera_matrix, horizon_distance, horizon_line,
    project, resample_topview, topview_map
)
from src.core.scene import (
    SceneObject, annotate, apparent_heights, perturbation_sweep, place_objects, reconstruct_height,
    render_checkerboard, sample_horizon, synthetic_correspondences
)
from src.utils.constants import STATUS_BEHIND, STATUS_OK
from src.utils.exceptions import InvalidParameterError

DISTANCES = [50.0, 100.0, 150.0, 200.0, 250.0, 300.0]


def _oracle_apparent_height(intr, true_pose, perturbed_pose, distance, height=1.0):
    """Project with the true camera, intersect rays of the perturbed camera by hand"""
    true_cam = camera_matrix(intr, true_pose)
    foot_px = project(true_cam, WorldPoint(0.0, distance, 0.0)).as_array()
    head_px = project(true_cam, WorldPoint(0.0, distance, height)).as_array()
    center, direction = scratch_ray(intr, perturbed_pose, foot_px)
    foot, _ = scratch_intersect(center, direction, 2, 0.0)
    center, direction = scratch_ray(intr, perturbed_pose, head_px)
    head, _ = scratch_intersect(center, direction, 1, foot[1])
    return head[2]


class TestPlaceObjects:
    def test_reference_scene(self):
        scene = place_objects(np.linspace(50.0, 150.0, 15), width=0.3, height=1.0)
        assert len(scene) == 15
        assert all(o.width == 0.3 and o.height == 1.0 for o in scene)

    def test_empty(self):
        assert place_objects([]) == []

    def test_single_object_on_the_y_axis(self):
        (obj,) = place_objects([100.0])
        assert (obj.base.x1, obj.base.x2, obj.base.x3) == (0.0, 100.0, 0.0)
        assert obj.top.x3 == 1.0

    def test_lateral_offsets(self):
        scene = place_objects([60.0, 80.0], lateral=[-2.0, 3.0])
        assert [o.base.x1 for o in scene] == [-2.0, 3.0]

    @pytest.mark.parametrize("distance", [0.0, -10.0])
    def test_non_positive_distance(self, distance):
        with pytest.raises(InvalidParameterError):
            place_objects([50.0, distance])


class TestAnnotate:
    def test_noiseless_annotations_equal_projections(self, reference_camera):
        scene = place_objects([60.0, 90.0, 120.0])
        result = annotate(reference_camera, scene, noise_sigma=0.0)
        assert result.excluded == 0
        for obj, annotation in zip(scene, result.annotations):
            assert annotation.foot == project(reference_camera, obj.base)
            assert annotation.head == project(reference_camera, obj.top)
            assert annotation.known_height == 1.0

    def test_same_seed_same_output(self, reference_camera):
        scene = place_objects(np.linspace(50.0, 150.0, 15))
        assert annotate(reference_camera, scene, 1.0, seed=4) == annotate(reference_camera, scene, 1.0, seed=4)
        assert annotate(reference_camera, scene, 1.0, seed=4) != annotate(reference_camera, scene, 1.0, seed=5)

    def test_noise_level(self, reference_camera):
        scene = place_objects(np.linspace(50.0, 150.0, 2500))
        exact = annotate(reference_camera, scene, 0.0).annotations
        noisy = annotate(reference_camera, scene, 1.0, seed=9).annotations
        deltas = np.array([[n.foot.y1 - e.foot.y1, n.foot.y2 - e.foot.y2,
                            n.head.y1 - e.head.y1, n.head.y2 - e.head.y2]
                           for n, e in zip(noisy, exact)])
        assert deltas.size == 10_000
        assert np.std(deltas) == pytest.approx(1.0, rel=0.05)

    def test_objects_behind_the_camera_are_counted(self, reference_camera, caplog):
        scene = place_objects([50.0, 80.0], lateral=[0.0, 0.0])
        behind = SceneObject(WorldPoint(0.0, -40.0, 0.0), 1.0)
        with caplog.at_level(logging.WARNING):
            result = annotate(reference_camera, scene + [behind], 0.0)
        assert result.excluded == 1
        assert len(result.annotations) == 2
        assert "behind the camera" in caplog.text

    def test_heads_sit_above_feet(self, reference_camera):
        for a in annotate(reference_camera, place_objects(np.linspace(20.0, 300.0, 12)), 0.0).annotations:
            assert a.foot.y2 > a.head.y2

    def test_upside_down_camera_is_rejected(self, reference_intrinsics):
        flipped = camera_matrix(reference_intrinsics, Pose(height=20.0, tilt=80.0, roll=180.0))
        with pytest.raises(InvalidParameterError, match="head below the foot"):
            annotate(flipped, place_objects([50.0, 100.0]), 0.0)


class TestApparentHeights:
    def test_identity_perturbation(self, reference_camera):
        for entry in apparent_heights(reference_camera, reference_camera.pose, DISTANCES):
            assert entry.ok
            assert entry.height == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("scale", [0.5, 1.1, 3.0])
    def test_height_scaling_is_a_similarity(self, reference_camera, scale):
        pose = reference_camera.pose.with_values(height=20.0 * scale)
        for entry in apparent_heights(reference_camera, pose, DISTANCES):
            assert entry.height == pytest.approx(scale, abs=1e-9)

    def test_similarity_for_other_poses(self, reference_intrinsics):
        true_cam = camera_matrix(reference_intrinsics, Pose(height=35.0, tilt=70.0, heading=15.0))
        pose = true_cam.pose.with_values(height=35.0 * 1.25)
        for entry in apparent_heights(true_cam, pose, [40.0, 90.0, 160.0]):
            assert entry.height == pytest.approx(1.25, abs=1e-9)

    def test_lower_tilt_error_grows_with_distance(self, reference_intrinsics, reference_camera):
        perturbed = reference_camera.pose.with_values(tilt=72.0)
        entries = apparent_heights(reference_camera, perturbed, DISTANCES)
        errors = np.array([abs(e.height - 1.0) for e in entries])
        assert all(e.ok for e in entries)
        assert np.all(np.diff(errors) > 0)
        assert errors[-1] > 3 * errors[0]
        for entry, distance in zip(entries, DISTANCES):
            expected = _oracle_apparent_height(reference_intrinsics, reference_camera.pose, perturbed, distance)
            assert entry.height == pytest.approx(expected, abs=1e-9)
        assert errors[0] == pytest.approx(0.203, abs=0.005)
        assert errors[-1] == pytest.approx(0.669, abs=0.005)

    def test_higher_tilt_pushes_far_objects_above_the_horizon(self, reference_camera):
        entries = apparent_heights(reference_camera, reference_camera.pose.with_values(tilt=88.0), DISTANCES)
        assert [e.status for e in entries] == [STATUS_OK, STATUS_OK] + [STATUS_BEHIND] * 4
        assert np.isnan(entries[-1].height)

    def test_near_error_under_higher_tilt_matches_ray_oracle(self, reference_intrinsics, reference_camera):
        perturbed = reference_camera.pose.with_values(tilt=88.0)
        entries = apparent_heights(reference_camera, perturbed, [50.0, 100.0])
        for entry, distance in zip(entries, [50.0, 100.0]):
            expected = _oracle_apparent_height(reference_intrinsics, reference_camera.pose, perturbed, distance)
            assert entry.height == pytest.approx(expected, abs=1e-9)
        assert abs(entries[1].height - 1.0) > abs(entries[0].height - 1.0)

    def test_reconstruct_height_of_a_sky_foot(self, reference_camera):
        result = reconstruct_height(reference_camera, ImagePoint(2304.0, 10.0), ImagePoint(2304.0, 5.0))
        assert result.status == STATUS_BEHIND


class TestSweep:
    def test_shape_and_columns(self, reference_camera):
        rows = perturbation_sweep(reference_camera, "height", 0.10, 5, DISTANCES)
        assert len(rows) == 5 * len(DISTANCES)
        assert sorted({r.value for r in rows}) == pytest.approx([18.0, 19.0, 20.0, 21.0, 22.0])
        assert [r.distance for r in rows[:6]] == DISTANCES
        assert all(r.apparent_height == pytest.approx(r.value / 20.0, abs=1e-9) for r in rows)

    def test_height_rows_are_flat_and_tilt_rows_fan_out(self, reference_camera):
        heights = perturbation_sweep(reference_camera, "height", 0.10, 3, DISTANCES)
        tilts = perturbation_sweep(reference_camera, "tilt", 0.10, 3, DISTANCES)
        for value in {r.value for r in heights}:
            column = [r.apparent_height for r in heights if r.value == value]
            assert np.ptp(column) < 1e-9
        low = [r for r in tilts if r.value == pytest.approx(72.0)]
        assert np.ptp([r.apparent_height for r in low]) > 0.4

    def test_zero_range(self, reference_camera):
        rows = perturbation_sweep(reference_camera, "tilt", 0.0, 3, [60.0, 120.0])
        assert {r.value for r in rows} == {80.0}
        assert all(r.apparent_height == pytest.approx(1.0, abs=1e-9) for r in rows)

    @pytest.mark.parametrize("parameter, steps", [("roll", 5), ("height", 1)])
    def test_invalid_arguments(self, reference_camera, parameter, steps):
        with pytest.raises(InvalidParameterError):
            perturbation_sweep(reference_camera, parameter, 0.1, steps, DISTANCES)


class TestSyntheticInputs:
    def test_horizon_samples_lie_on_the_horizon(self, reference_camera):
        points = sample_horizon(reference_camera, 10)
        line = horizon_line(reference_camera)
        assert len(points) == 10
        distances = horizon_distance(line, np.array([p.as_array() for p in points]))
        np.testing.assert_allclose(distances, 0.0, atol=1e-9)
        assert points[0].y1 < points[-1].y1

    def test_correspondences_reproject(self, reference_intrinsics):
        cam = camera_matrix(reference_intrinsics, Pose(height=300.0, tilt=50.0, heading=20.0))
        correspondences = synthetic_correspondences(cam, count=8)
        assert len(correspondences) == 8
        for c in correspondences:
            assert project(cam, c.world).as_array() == pytest.approx(c.image.as_array(), abs=1e-6)

    def test_checkerboard_top_view_has_equal_squares(self):
        intr = Intrinsics(14.0, 17.3, 9.7, 960, 540)
        cam = camera_matrix(intr, Pose(height=20.0, tilt=60.0))
        image = render_checkerboard(cam, square=5.0)
        assert image.shape == (540, 960)
        grid = topview_map(cam, (0.0, 0.5, 20.0, 45.0), 0.5)
        assert grid.valid.all()
        column = resample_topview(image, grid)[:, 0]
        # in the image the far squares are squeezed into few rows; on the ground every square spans 10 cells
        edges = np.flatnonzero(np.diff(column.astype(int)) != 0) + 1
        runs = np.diff(np.concatenate([[0], edges, [len(column)]]))
        assert len(runs) == 5
        assert all(9 <= run <= 11 for run in runs)
