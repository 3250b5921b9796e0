"""
Projective Core
Camera matrices, projection, constrained back-projection, horizon and top view
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Dict, Tuple, Union

import numpy as np

from ..utils.constants import (
    DEGENERATE_DET_TOL, DEGENERATE_PIXEL_TOL, GRID_MULTIPLE_TOL, HORIZON_TOL, LINE_POINT_TOL,
    PLANE_SCALE_TOL, RASTER_FILL_VALUE, VIEW_SIGN
)
from ..utils.exceptions import (
    DegenerateHorizonError, DegenerateRayError, InvalidParameterError,
    PointAtCameraPlaneError
)
from ..utils.helpers import cross2d, normalize_angle, require_finite, require_positive

logger = logging.getLogger(__name__)

AXES = {"x1": 0, "x2": 1, "x3": 2}


@dataclass(frozen=True)
class Intrinsics:
    """Sensor and lens description (lengths in mm, image size in px)"""

    focal_length: float
    sensor_width: float
    sensor_height: float
    image_width: int
    image_height: int

    def __post_init__(self):
        for name in ("focal_length", "sensor_width", "sensor_height"):
            object.__setattr__(self, name, require_positive(name, getattr(self, name)))
        for name in ("image_width", "image_height"):
            value = require_positive(name, getattr(self, name))
            if not value.is_integer():
                raise InvalidParameterError(f"{name} must be a whole number of pixels, got {value}")
            object.__setattr__(self, name, int(value))
        f_pix = self.focal_length / self.sensor_width * self.image_width
        if not math.isfinite(f_pix) or f_pix <= 0.0:
            raise InvalidParameterError(f"effective focal length {f_pix} is not positive and finite")

    @property
    def f_pix(self) -> float:
        """Effective focal length in pixels (width ratio only)"""
        return self.focal_length / self.sensor_width * self.image_width

    @property
    def center(self) -> Tuple[float, float]:
        return self.image_width / 2.0, self.image_height / 2.0


@dataclass(frozen=True)
class Pose:
    """Extrinsic parameters; angles in degrees, stored in (-180, 180]"""

    height: float = 0.0
    tilt: float = 0.0
    roll: float = 0.0
    heading: float = 0.0
    offset_x: float = 0.0
    offset_y: float = 0.0

    def __post_init__(self):
        for name in ("height", "offset_x", "offset_y"):
            object.__setattr__(self, name, require_finite(name, getattr(self, name)))
        for name in ("tilt", "roll", "heading"):
            object.__setattr__(self, name, normalize_angle(require_finite(name, getattr(self, name))))

    def with_values(self, **changes: float) -> "Pose":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class WorldPoint:
    x1: float
    x2: float
    x3: float = 0.0

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            object.__setattr__(self, name, require_finite(name, getattr(self, name)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


@dataclass(frozen=True)
class ImagePoint:
    """Continuous pixel position, origin at the top-left image corner"""

    y1: float
    y2: float

    def __post_init__(self):
        for name in ("y1", "y2"):
            object.__setattr__(self, name, require_finite(name, getattr(self, name)))

    def as_array(self) -> np.ndarray:
        return np.array([self.y1, self.y2])


@dataclass(frozen=True)
class ImageLine:
    """Infinite image line through two generator points"""

    start: ImagePoint
    end: ImagePoint

    def __post_init__(self):
        if math.hypot(self.end.y1 - self.start.y1, self.end.y2 - self.start.y2) <= LINE_POINT_TOL:
            raise InvalidParameterError("line generator points coincide")

    @property
    def slope(self) -> float:
        """dy2/dy1 in pixel coordinates (y2 grows downwards)"""
        dy1 = self.end.y1 - self.start.y1
        return (self.end.y2 - self.start.y2) / dy1 if dy1 != 0.0 else math.inf


@dataclass(frozen=True, eq=False)
class CameraMatrix:
    """Projection matrix with its factors; arrays are read-only"""

    intrinsics: Intrinsics
    pose: Pose
    intrinsic: np.ndarray
    extrinsic: np.ndarray
    combined: np.ndarray
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        for name in ("intrinsic", "extrinsic", "combined", "rotation", "translation"):
            getattr(self, name).setflags(write=False)


@dataclass(frozen=True)
class BackProjection:
    """World point recovered from a pixel; in_front is False for rays hitting behind the camera"""

    point: WorldPoint
    in_front: bool


@dataclass(frozen=True, eq=False)
class TopViewGrid:
    """Source pixel for every ground cell; NaN marks cells with no source pixel"""

    x_centers: np.ndarray
    y_centers: np.ndarray
    resolution: float
    pixels: np.ndarray
    image_size: Tuple[int, int]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape[:2]

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.pixels[..., 0])


def tilt_matrix(degrees: float) -> np.ndarray:
    c, s = math.cos(math.radians(degrees)), math.sin(math.radians(degrees))
    return np.array([[1.0, 0.0, 0.0],
                     [0.0, c, s],
                     [0.0, -s, c]])


def roll_matrix(degrees: float) -> np.ndarray:
    c, s = math.cos(math.radians(degrees)), math.sin(math.radians(degrees))
    return np.array([[c, s, 0.0],
                     [-s, c, 0.0],
                     [0.0, 0.0, 1.0]])


def heading_matrix(degrees: float) -> np.ndarray:
    # same form as the roll rotation; applied in world space
    return roll_matrix(degrees)


def intrinsic_matrix(intr: Intrinsics) -> np.ndarray:
    """3x4 intrinsic matrix"""
    f = intr.f_pix
    cx, cy = intr.center
    return np.array([[f, 0.0, cx, 0.0],
                     [0.0, f, cy, 0.0],
                     [0.0, 0.0, 1.0, 0.0]])


def extrinsic_matrix(pose: Pose) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """4x4 extrinsic matrix with its rotation and translation factors.

    The translation is R_tilt . R_heading . t without the roll rotation,
    exactly as the forward model is defined; forward and backward
    transforms share this matrix so they stay mutual inverses.
    """
    r_tilt = tilt_matrix(pose.tilt)
    r_heading = heading_matrix(pose.heading)
    rotation = roll_matrix(pose.roll) @ r_tilt @ r_heading
    t = np.array([pose.offset_x, pose.offset_y, -pose.height])
    translation = r_tilt @ r_heading @ t
    extrinsic = np.eye(4)
    extrinsic[:3, :3] = rotation
    extrinsic[:3, 3] = translation
    return extrinsic, rotation, translation


def camera_matrix(intr: Intrinsics, pose: Pose) -> CameraMatrix:
    """Combined 3x4 camera matrix K@E with its factors"""
    intrinsic = intrinsic_matrix(intr)
    extrinsic, rotation, translation = extrinsic_matrix(pose)
    return CameraMatrix(
        intrinsics=intr,
        pose=pose,
        intrinsic=intrinsic,
        extrinsic=extrinsic,
        combined=intrinsic @ extrinsic,
        rotation=rotation,
        translation=translation,
    )


def camera_center(cam: CameraMatrix) -> WorldPoint:
    """World position of the optical centre"""
    return WorldPoint(*(-cam.rotation.T @ cam.translation))


def project_homogeneous(cam: CameraMatrix, point: np.ndarray) -> ImagePoint:
    """Project a homogeneous world 4-vector (directions at infinity included)"""
    p = cam.combined @ np.asarray(point, dtype=float)
    if abs(p[2]) < PLANE_SCALE_TOL:
        raise PointAtCameraPlaneError(f"projective scale {p[2]:.3e} vanishes")
    return ImagePoint(p[0] / p[2], p[1] / p[2])


def project(cam: CameraMatrix, point: WorldPoint) -> ImagePoint:
    """Pixel at which a world point is imaged"""
    return project_homogeneous(cam, np.append(point.as_array(), 1.0))


def projective_scale(cam: CameraMatrix, point: WorldPoint) -> float:
    """Third homogeneous image coordinate; its sign tells front from back"""
    return float(cam.combined[2] @ np.append(point.as_array(), 1.0))


def in_front(cam: CameraMatrix, point: WorldPoint) -> bool:
    """True if the point lies on the viewing side of the camera plane"""
    return projective_scale(cam, point) * VIEW_SIGN > 0.0


def project_points(cam: CameraMatrix, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised projection of an Nx3 array.

    Returns Nx2 pixels (NaN where the scale vanishes) and the N projective scales.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    homogeneous = np.hstack([points, np.ones((len(points), 1))])
    p = homogeneous @ cam.combined.T
    scale = p[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        pixels = p[:, :2] / scale[:, None]
    pixels[np.abs(scale) < PLANE_SCALE_TOL] = np.nan
    return pixels, scale


def _axis_index(fixed_axis: str) -> int:
    try:
        return AXES[fixed_axis]
    except KeyError:
        raise InvalidParameterError(f"fixed axis must be one of {sorted(AXES)}, got '{fixed_axis}'") from None


def _reduced_inverse(cam: CameraMatrix, axis: int, value: float) -> np.ndarray:
    """Inverse of the 3x3 matrix with the fixed coordinate folded into the constant column"""
    reduced = cam.combined[:, :3].copy()
    reduced[:, axis] = cam.combined[:, axis] * value + cam.combined[:, 3]
    norms = np.prod(np.linalg.norm(reduced, axis=0))
    det = np.linalg.det(reduced)
    if norms == 0.0 or abs(det) / norms < DEGENERATE_DET_TOL:
        raise DegenerateRayError(
            f"camera centre lies on the plane {list(AXES)[axis]}={value}; no unique intersection"
        )
    return np.linalg.inv(reduced)


def backproject(cam: CameraMatrix, pixel: ImagePoint, fixed_axis: str = "x3",
                fixed_value: float = 0.0) -> BackProjection:
    """World point on the plane fixed_axis = fixed_value seen at pixel"""
    axis = _axis_index(fixed_axis)
    fixed_value = require_finite("fixed_value", fixed_value)
    inverse = _reduced_inverse(cam, axis, fixed_value)
    u = inverse @ np.array([pixel.y1, pixel.y2, 1.0])
    s = u[axis]
    # s is the (scaled) distance of the pixel to the plane's vanishing line
    line_norm = math.hypot(inverse[axis, 0], inverse[axis, 1])
    if s == 0.0 or (line_norm > 0.0 and abs(s) / line_norm < DEGENERATE_PIXEL_TOL):
        raise DegenerateRayError(
            f"ray through ({pixel.y1:.3f}, {pixel.y2:.3f}) is parallel to {fixed_axis}={fixed_value}"
        )
    coords = u / s
    coords[axis] = fixed_value
    front = s * VIEW_SIGN > 0.0
    if not front:
        logger.debug("pixel (%.3f, %.3f) back-projects behind the camera", pixel.y1, pixel.y2)
    return BackProjection(WorldPoint(*coords), bool(front))


def backproject_points(cam: CameraMatrix, pixels: np.ndarray, fixed_axis: str = "x3",
                       fixed_value: float = 0.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised back-projection of an Nx2 pixel array.

    Returns Nx3 points (NaN for degenerate rays), the in-front mask and the
    non-degenerate mask.
    """
    axis = _axis_index(fixed_axis)
    fixed_value = require_finite("fixed_value", fixed_value)
    inverse = _reduced_inverse(cam, axis, fixed_value)
    pixels = np.atleast_2d(np.asarray(pixels, dtype=float))
    homogeneous = np.hstack([pixels, np.ones((len(pixels), 1))])
    u = homogeneous @ inverse.T
    s = u[:, axis]
    line_norm = math.hypot(inverse[axis, 0], inverse[axis, 1])
    valid = s != 0.0
    if line_norm > 0.0:
        valid &= np.abs(s) / line_norm >= DEGENERATE_PIXEL_TOL
    valid &= np.all(np.isfinite(u), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        points = u / s[:, None]
    points[:, axis] = fixed_value
    points[~valid] = np.nan
    front = valid & (s * VIEW_SIGN > 0.0)
    return points, front, valid


def horizon_line(cam: CameraMatrix) -> ImageLine:
    """Image of the horizontal directions at infinity.

    The line is the cross product of the images of the x and y world
    directions; the translation column never enters, so the result does not
    depend on camera height or offsets. Generator points lie on the image
    border and are ordered left to right (top to bottom for a vertical line).
    """
    a, b, c = np.cross(cam.combined[:, 0], cam.combined[:, 1])
    if math.hypot(a, b) <= HORIZON_TOL * abs(c) or (a == 0.0 and b == 0.0):
        raise DegenerateHorizonError("horizon is at infinity (camera looks straight up or down)")
    width, height = cam.intrinsics.image_width, cam.intrinsics.image_height
    if abs(b) >= abs(a):
        start = ImagePoint(0.0, -c / b)
        end = ImagePoint(float(width), -(a * width + c) / b)
    else:
        start = ImagePoint(-c / a, 0.0)
        end = ImagePoint(-(b * height + c) / a, float(height))
    if (end.y1, end.y2) < (start.y1, start.y2):
        start, end = end, start
    return ImageLine(start, end)


def horizon_distance(line: ImageLine, points: Union[ImagePoint, np.ndarray]) -> np.ndarray:
    """Signed perpendicular pixel distance; positive below a left-to-right line"""
    start = line.start.as_array()
    direction = line.end.as_array() - start
    xy = points.as_array() if isinstance(points, ImagePoint) else np.asarray(points, dtype=float)
    return cross2d(direction, xy - start) / np.hypot(*direction)


def _cell_count(axis: str, span: float, resolution: float) -> int:
    cells = span / resolution
    count = int(round(cells))
    if count < 1 or abs(cells - count) > GRID_MULTIPLE_TOL * max(1.0, cells):
        raise InvalidParameterError(
            f"{axis} extent of {span:g} m is not a whole number of {resolution:g} m cells"
        )
    return count


def topview_map(cam: CameraMatrix, extent: Tuple[float, float, float, float],
                resolution: float) -> TopViewGrid:
    """Source pixel for every cell of a ground rectangle (x_min, x_max, y_min, y_max).

    Row 0 is the far edge (y_max) so the grid reads like a map with +y up.
    Both sides of the extent must be whole multiples of resolution.
    """
    resolution = require_positive("resolution", resolution)
    x_min, x_max, y_min, y_max = (require_finite("extent", v) for v in extent)
    if x_max <= x_min or y_max <= y_min:
        raise InvalidParameterError(f"extent {extent} has zero area")
    nx = _cell_count("x", x_max - x_min, resolution)
    ny = _cell_count("y", y_max - y_min, resolution)
    x_centers = x_min + (np.arange(nx) + 0.5) * resolution
    y_centers = y_max - (np.arange(ny) + 0.5) * resolution
    gx, gy = np.meshgrid(x_centers, y_centers)
    ground = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)])
    pixels, scale = project_points(cam, ground)
    width, height = cam.intrinsics.image_width, cam.intrinsics.image_height
    with np.errstate(invalid="ignore"):
        inside = ((scale * VIEW_SIGN > 0.0)
                  & (pixels[:, 0] >= 0.0) & (pixels[:, 0] < width)
                  & (pixels[:, 1] >= 0.0) & (pixels[:, 1] < height))
    pixels[~inside] = np.nan
    logger.debug("top view %dx%d cells, %d mapped", ny, nx, int(inside.sum()))
    return TopViewGrid(x_centers, y_centers, resolution, pixels.reshape(ny, nx, 2), (width, height))


def resample_topview(image: np.ndarray, grid: TopViewGrid) -> np.ndarray:
    """Nearest-neighbour warp of a raster onto the top-view grid"""
    image = np.asarray(image)
    width, height = grid.image_size
    if image.shape[:2] != (height, width):
        raise InvalidParameterError(
            f"raster is {image.shape[1]}x{image.shape[0]} px, camera expects {width}x{height} px"
        )
    out = np.full(grid.shape + image.shape[2:], RASTER_FILL_VALUE, dtype=image.dtype)
    valid = grid.valid
    cols = np.floor(grid.pixels[valid, 0]).astype(int)
    rows = np.floor(grid.pixels[valid, 1]).astype(int)
    out[valid] = image[rows, cols]
    return out
