"""
Top View and Synthesis Commands
Ground-plane mapping grids, raster warping and synthetic input files
"""

import logging
from pathlib import Path

from .common import add_config_argument, add_output_argument, emit, load_config, parse_floats
from ..core.data_manager import DataManager
from ..core.projective import camera_matrix, resample_topview, topview_map
from ..core.scene import (
    annotate, place_objects, render_checkerboard, sample_horizon, synthetic_correspondences
)
from ..utils.constants import (
    DEFAULT_HORIZON_POINTS, DEFAULT_NOISE_SIGMA_PX, DEFAULT_OBJECT_HEIGHT_M, EXIT_OK
)
from ..utils.exceptions import InvalidInputError, InvalidParameterError

logger = logging.getLogger(__name__)


class TopViewCommands:
    """Top-view export and synthetic data generation"""

    def __init__(self, subparsers):
        self._setup_topview(subparsers)
        self._setup_synth(subparsers)

    def _setup_topview(self, subparsers) -> None:
        parser = subparsers.add_parser("topview", help="map a ground rectangle to source pixels")
        add_config_argument(parser)
        parser.add_argument("--extent", required=True, metavar="XMIN,XMAX,YMIN,YMAX",
                            help="ground rectangle in metres")
        parser.add_argument("--resolution", type=float, required=True, help="cell size in metres")
        parser.add_argument("--image", type=Path, default=None, help="PPM/PGM raster taken by the camera")
        parser.add_argument("--warped", type=Path, default=None, help="warped PPM/PGM output")
        add_output_argument(parser, "mapping grid CSV (default: stdout)")
        parser.set_defaults(handler=self.topview)

    def _setup_synth(self, subparsers) -> None:
        parser = subparsers.add_parser("synth", help="write synthetic inputs for the configured camera")
        add_config_argument(parser)
        parser.add_argument("--distances", default="50,75,100,125,150", help="object distances in metres")
        parser.add_argument("--object-height", type=float, default=DEFAULT_OBJECT_HEIGHT_M)
        parser.add_argument("--noise", type=float, default=DEFAULT_NOISE_SIGMA_PX, help="click noise sigma (px)")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--count", type=int, default=DEFAULT_HORIZON_POINTS,
                            help="number of horizon points and correspondences")
        parser.add_argument("--annotations", type=Path, default=None, help="annotation CSV output")
        parser.add_argument("--horizon", type=Path, default=None, help="horizon point CSV output")
        parser.add_argument("--correspondences", type=Path, default=None, help="correspondence CSV output")
        parser.add_argument("--geo", action="store_true", help="write correspondences as lat/lon")
        parser.add_argument("--checkerboard", type=Path, default=None, help="checkerboard PGM output")
        parser.add_argument("--square", type=float, default=5.0, help="checkerboard square size (m)")
        parser.set_defaults(handler=self.synth)

    def topview(self, args) -> int:
        config = load_config(args)
        data = DataManager()
        extent = parse_floats(args.extent, "--extent")
        if len(extent) != 4:
            raise InvalidParameterError(f"--extent needs 4 values, got {len(extent)}")
        grid = topview_map(camera_matrix(config.intrinsics, config.pose), tuple(extent), args.resolution)
        if args.warped and not args.image:
            raise InvalidInputError("--warped needs --image")
        if args.image:
            raster = data.read_raster(args.image)
            warped = resample_topview(raster, grid)
            if args.warped:
                data.write_raster(warped, args.warped)
        emit(data.write_topview_grid(grid), args.output)
        return EXIT_OK

    def synth(self, args) -> int:
        config = load_config(args)
        data = DataManager(config.geo_anchor)
        cam = camera_matrix(config.intrinsics, config.pose)
        written = 0
        if args.annotations:
            scene = place_objects(parse_floats(args.distances, "--distances"), height=args.object_height)
            data.write_annotations(annotate(cam, scene, args.noise, args.seed).annotations, args.annotations)
            written += 1
        if args.horizon:
            data.write_horizon(sample_horizon(cam, args.count, args.noise, args.seed), args.horizon)
            written += 1
        if args.correspondences:
            if args.geo and config.geo_anchor is None:
                raise InvalidInputError("--geo needs a geo_anchor in the camera config")
            correspondences = synthetic_correspondences(cam, count=args.count, noise_sigma=args.noise,
                                                        seed=args.seed)
            data.write_correspondences(correspondences, args.correspondences, geographic=args.geo)
            written += 1
        if args.checkerboard:
            data.write_raster(render_checkerboard(cam, args.square), args.checkerboard)
            written += 1
        if not written:
            raise InvalidInputError("nothing to write (give at least one output file)")
        return EXIT_OK
