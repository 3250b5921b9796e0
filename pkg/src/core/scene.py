"""
Scene Synthesis
Synthetic ground scenes, annotation data and the parameter-perturbation study
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .projective import (
    CameraMatrix, ImagePoint, Pose, WorldPoint, backproject, backproject_points,
    camera_matrix, horizon_line, project_points
)
from ..utils.constants import (
    DEFAULT_HORIZON_POINTS, DEFAULT_NOISE_SIGMA_PX, DEFAULT_OBJECT_HEIGHT_M,
    DEFAULT_OBJECT_WIDTH_M, DEFAULT_SWEEP_RANGE, DEFAULT_SWEEP_STEPS, STATUS_BEHIND,
    STATUS_DEGENERATE, STATUS_OK, VIEW_SIGN
)
from ..utils.exceptions import CameraGeometryError, DegenerateRayError, InvalidParameterError
from ..utils.helpers import derive_seed, linspace_around, require_positive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SceneObject:
    base: WorldPoint
    height: float
    width: float = 0.0

    def __post_init__(self):
        require_positive("object height", self.height)
        if not self.width >= 0.0:
            raise InvalidParameterError(f"object width must be >= 0, got {self.width}")
        if self.base.x3 != 0.0:
            raise InvalidParameterError("object base must lie on the ground (x3 = 0)")

    @property
    def top(self) -> WorldPoint:
        return WorldPoint(self.base.x1, self.base.x2, self.height)


@dataclass(frozen=True)
class ObjectAnnotation:
    """Clicked foot and head pixels of an object of known height"""

    foot: ImagePoint
    head: ImagePoint
    known_height: float

    def __post_init__(self):
        require_positive("known height", self.known_height)


@dataclass(frozen=True)
class AnnotationSet:
    annotations: List[ObjectAnnotation]
    excluded: int


@dataclass(frozen=True)
class ApparentHeight:
    distance: float
    height: float
    status: str

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    distance: float
    apparent_height: float
    status: str


@dataclass(frozen=True)
class Correspondence:
    """Image point paired with a ground point of the map frame"""

    image: ImagePoint
    world: WorldPoint

    def __post_init__(self):
        if self.world.x3 != 0.0:
            raise InvalidParameterError("correspondence world points lie on the ground (x3 = 0)")


def place_objects(distances: Sequence[float], width: float = DEFAULT_OBJECT_WIDTH_M,
                  height: float = DEFAULT_OBJECT_HEIGHT_M,
                  lateral: Optional[Sequence[float]] = None) -> List[SceneObject]:
    """One object per distance on the y axis, optionally shifted sideways"""
    if lateral is not None and len(lateral) != len(distances):
        raise InvalidParameterError("lateral offsets must match distances one to one")
    objects = []
    for i, d in enumerate(distances):
        d = require_positive("distance", d)
        x1 = float(lateral[i]) if lateral is not None else 0.0
        objects.append(SceneObject(WorldPoint(x1, d, 0.0), height, width))
    return objects


def annotate(cam: CameraMatrix, scene: Sequence[SceneObject],
             noise_sigma: float = DEFAULT_NOISE_SIGMA_PX, seed: int = 0) -> AnnotationSet:
    """Foot/head pixels of every visible object with isotropic Gaussian click noise"""
    if noise_sigma < 0.0:
        raise InvalidParameterError(f"noise sigma must be >= 0, got {noise_sigma}")
    if not scene:
        return AnnotationSet([], 0)
    feet, foot_scale = project_points(cam, np.array([o.base.as_array() for o in scene]))
    heads, head_scale = project_points(cam, np.array([o.top.as_array() for o in scene]))
    visible = ((foot_scale * VIEW_SIGN > 0.0) & (head_scale * VIEW_SIGN > 0.0)
               & np.all(np.isfinite(feet), axis=1) & np.all(np.isfinite(heads), axis=1))
    excluded = int((~visible).sum())
    if excluded:
        logger.warning("%d of %d objects are behind the camera and were not annotated",
                       excluded, len(scene))
    upside_down = visible & (feet[:, 1] < heads[:, 1])
    if upside_down.any():
        raise InvalidParameterError(
            f"{int(upside_down.sum())} upright objects image with the head below the foot; "
            "the camera pose turns the ground upside down"
        )
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, noise_sigma, size=(len(scene), 4)) if noise_sigma > 0.0 \
        else np.zeros((len(scene), 4))
    annotations = []
    for i, obj in enumerate(scene):
        if not visible[i]:
            continue
        annotations.append(ObjectAnnotation(
            foot=ImagePoint(feet[i, 0] + noise[i, 0], feet[i, 1] + noise[i, 1]),
            head=ImagePoint(heads[i, 0] + noise[i, 2], heads[i, 1] + noise[i, 3]),
            known_height=obj.height,
        ))
    return AnnotationSet(annotations, excluded)


def reconstruct_height(cam: CameraMatrix, foot: ImagePoint, head: ImagePoint) -> ApparentHeight:
    """Object height seen under cam: foot on the ground, head on the vertical plane through the foot"""
    try:
        base = backproject(cam, foot, "x3", 0.0)
        if not base.in_front:
            return ApparentHeight(float("nan"), float("nan"), STATUS_BEHIND)
        top = backproject(cam, head, "x2", base.point.x2)
    except DegenerateRayError:
        return ApparentHeight(float("nan"), float("nan"), STATUS_DEGENERATE)
    if not top.in_front:
        return ApparentHeight(base.point.x2, float("nan"), STATUS_BEHIND)
    return ApparentHeight(base.point.x2, top.point.x3, STATUS_OK)


def apparent_heights(true_cam: CameraMatrix, perturbed_pose: Pose, distances: Sequence[float],
                     object_height: float = DEFAULT_OBJECT_HEIGHT_M) -> List[ApparentHeight]:
    """Heights of upright objects imaged by true_cam and measured back under perturbed_pose"""
    perturbed = camera_matrix(true_cam.intrinsics, perturbed_pose)
    results = []
    for obj in place_objects(distances, width=0.0, height=object_height):
        feet, _ = project_points(true_cam, obj.base.as_array())
        heads, _ = project_points(true_cam, obj.top.as_array())
        try:
            measured = reconstruct_height(perturbed, ImagePoint(*feet[0]), ImagePoint(*heads[0]))
        except CameraGeometryError:
            measured = ApparentHeight(float("nan"), float("nan"), STATUS_DEGENERATE)
        if not measured.ok:
            logger.info("object at %.1f m: %s under the perturbed camera", obj.base.x2, measured.status)
        results.append(ApparentHeight(obj.base.x2, measured.height, measured.status))
    return results


def perturbation_sweep(true_cam: CameraMatrix, parameter: str,
                       relative_range: float = DEFAULT_SWEEP_RANGE,
                       steps: int = DEFAULT_SWEEP_STEPS,
                       distances: Sequence[float] = (),
                       object_height: float = DEFAULT_OBJECT_HEIGHT_M) -> List[SweepRow]:
    """Apparent heights over a grid of relative changes of height or tilt"""
    if parameter not in ("height", "tilt"):
        raise InvalidParameterError(f"sweep parameter must be 'height' or 'tilt', got '{parameter}'")
    if steps < 2:
        raise InvalidParameterError(f"sweep needs at least 2 steps, got {steps}")
    base = getattr(true_cam.pose, parameter)
    rows = []
    for value in linspace_around(base, relative_range, steps):
        pose = true_cam.pose.with_values(**{parameter: float(value)})
        for entry in apparent_heights(true_cam, pose, distances, object_height):
            rows.append(SweepRow(parameter, float(value), entry.distance, entry.height, entry.status))
    return rows


def sample_horizon(cam: CameraMatrix, count: int = DEFAULT_HORIZON_POINTS,
                   noise_sigma: float = 0.0, seed: int = 0) -> List[ImagePoint]:
    """Points spread along the visible horizon, as a user would click them"""
    if count < 1:
        raise InvalidParameterError("at least one horizon point is needed")
    line = horizon_line(cam)
    start, end = line.start.as_array(), line.end.as_array()
    fractions = (np.arange(count) + 0.5) / count
    points = start + fractions[:, None] * (end - start)
    if noise_sigma > 0.0:
        points = points + derive_seed(seed, 1).normal(0.0, noise_sigma, size=points.shape)
    return [ImagePoint(*p) for p in points]


def synthetic_correspondences(cam: CameraMatrix, pixels: Optional[np.ndarray] = None,
                              count: int = 8, noise_sigma: float = 0.0,
                              seed: int = 0) -> List[Correspondence]:
    """Map correspondences for ground points seen at the given (or a spread of) pixels"""
    intr = cam.intrinsics
    if pixels is None:
        cols = int(np.ceil(count / 2))
        u = (np.arange(cols) + 0.5) / cols * intr.image_width * 0.8 + intr.image_width * 0.1
        v = np.array([0.35, 0.8]) * intr.image_height
        pixels = np.array([(x, y) for y in v for x in u])[:count]
    points, front, valid = backproject_points(cam, pixels, "x3", 0.0)
    usable = front & valid
    if not usable.all():
        logger.warning("%d pixels do not see the ground and were skipped", int((~usable).sum()))
    clicked = np.asarray(pixels, dtype=float)
    if noise_sigma > 0.0:
        clicked = clicked + derive_seed(seed, 2).normal(0.0, noise_sigma, size=clicked.shape)
    return [Correspondence(ImagePoint(*clicked[i]), WorldPoint(points[i, 0], points[i, 1], 0.0))
            for i in np.flatnonzero(usable)]


def render_checkerboard(cam: CameraMatrix, square: float = 5.0, sky_value: int = 128) -> np.ndarray:
    """Greyscale image of a ground checkerboard; pixels not seeing the ground get sky_value"""
    square = require_positive("square size", square)
    width, height = cam.intrinsics.image_width, cam.intrinsics.image_height
    cols, rows = np.meshgrid(np.arange(width) + 0.5, np.arange(height) + 0.5)
    pixels = np.column_stack([cols.ravel(), rows.ravel()])
    ground, front, valid = backproject_points(cam, pixels, "x3", 0.0)
    image = np.full(len(pixels), sky_value, dtype=np.uint8)
    seen = front & valid
    parity = (np.floor(ground[seen, 0] / square) + np.floor(ground[seen, 1] / square)) % 2
    image[seen] = np.where(parity == 0, 255, 0)
    return image.reshape(height, width)
