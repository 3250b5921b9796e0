"""
Projection Commands
project, backproject and horizon
"""

import logging

import numpy as np

from .common import (
    add_config_argument, add_output_argument, emit, load_config
)
from ..core.data_manager import DataManager
from ..core.projective import AXES, backproject_points, camera_matrix, horizon_line, project_points
from ..utils.constants import (
    EXIT_DEGENERATE, EXIT_OK, IMAGE_POINT_COLUMNS, PLANE_SCALE_TOL, STATUS_BEHIND,
    STATUS_DEGENERATE, STATUS_OK, VIEW_SIGN, WORLD_POINT_COLUMNS
)
from ..utils.exceptions import DegenerateRayError, InvalidInputError
from ..utils.helpers import parse_point

logger = logging.getLogger(__name__)


class ProjectionCommands:
    """World-to-image and image-to-world conversions for single points or files"""

    def __init__(self, subparsers):
        self._setup_project(subparsers)
        self._setup_backproject(subparsers)
        self._setup_horizon(subparsers)

    def _setup_project(self, subparsers) -> None:
        parser = subparsers.add_parser("project", help="project world points to pixels")
        add_config_argument(parser)
        parser.add_argument("--points", help="CSV with columns x1,x2,x3")
        parser.add_argument("--point", action="append", default=[], metavar="X1,X2,X3",
                            help="inline world point (repeatable)")
        add_output_argument(parser)
        parser.set_defaults(handler=self.project)

    def _setup_backproject(self, subparsers) -> None:
        parser = subparsers.add_parser("backproject", help="back-project pixels with one world coordinate fixed")
        add_config_argument(parser)
        parser.add_argument("--pixels", help="CSV with columns y1,y2")
        parser.add_argument("--pixel", action="append", default=[], metavar="Y1,Y2",
                            help="inline pixel (repeatable)")
        parser.add_argument("--fix", required=True, choices=sorted(AXES), help="world coordinate to fix")
        parser.add_argument("--value", required=True, type=float, help="value of the fixed coordinate")
        add_output_argument(parser)
        parser.set_defaults(handler=self.backproject)

    def _setup_horizon(self, subparsers) -> None:
        parser = subparsers.add_parser("horizon", help="horizon line generator points")
        add_config_argument(parser)
        add_output_argument(parser)
        parser.set_defaults(handler=self.horizon)

    @staticmethod
    def _gather(path, inline, dims, reader) -> np.ndarray:
        points = [np.asarray(parse_point(text, dims)) for text in inline]
        if path:
            points.extend(reader(path))
        if not points:
            raise InvalidInputError("no points given (use a points file or inline points)")
        return np.array(points, dtype=float).reshape(-1, dims)

    def project(self, args) -> int:
        config = load_config(args)
        data = DataManager()
        cam = camera_matrix(config.intrinsics, config.pose)
        points = self._gather(args.points, args.point, 3, data.read_world_points)
        pixels, scale = project_points(cam, points)
        rows = []
        for point, pixel, s in zip(points, pixels, scale):
            if abs(s) < PLANE_SCALE_TOL:
                status = STATUS_DEGENERATE
            elif s * VIEW_SIGN > 0.0:
                status = STATUS_OK
            else:
                status = STATUS_BEHIND
            rows.append((*point, *pixel, status))
        emit(data.write_table(rows, WORLD_POINT_COLUMNS + IMAGE_POINT_COLUMNS + ("status",)), args.output)
        return self._exit_code(rows)

    def backproject(self, args) -> int:
        config = load_config(args)
        data = DataManager()
        cam = camera_matrix(config.intrinsics, config.pose)
        pixels = self._gather(args.pixels, args.pixel, 2, data.read_image_points)
        try:
            points, front, valid = backproject_points(cam, pixels, args.fix, args.value)
        except DegenerateRayError as e:
            logger.warning("%s", e)
            points = np.full((len(pixels), 3), np.nan)
            front = valid = np.zeros(len(pixels), dtype=bool)
        rows = []
        for pixel, point, f, v in zip(pixels, points, front, valid):
            status = STATUS_DEGENERATE if not v else (STATUS_OK if f else STATUS_BEHIND)
            rows.append((*pixel, *point, status))
        emit(data.write_table(rows, IMAGE_POINT_COLUMNS + WORLD_POINT_COLUMNS + ("status",)), args.output)
        return self._exit_code(rows)

    def horizon(self, args) -> int:
        config = load_config(args)
        line = horizon_line(camera_matrix(config.intrinsics, config.pose))
        rows = [(line.start.y1, line.start.y2), (line.end.y1, line.end.y2)]
        emit(DataManager().write_table(rows, IMAGE_POINT_COLUMNS), args.output)
        return EXIT_OK

    @staticmethod
    def _exit_code(rows) -> int:
        failed = sum(1 for row in rows if row[-1] != STATUS_OK)
        if failed:
            logger.warning("%d of %d points are not usable", failed, len(rows))
            return EXIT_DEGENERATE
        return EXIT_OK
