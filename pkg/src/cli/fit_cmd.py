"""
Fitting Commands
fit-objects and fit-map
"""

import logging
import math
from pathlib import Path

from .common import (
    add_config_argument, emit, load_config, parse_free, parse_initial
)
from ..core.config_manager import ConfigManager
from ..core.data_manager import DataManager
from ..core.fitting import ResidualSpec, fit, fit_multistart, map_residuals
from ..core.geo import camera_position_gps
from ..core.projective import camera_matrix
from ..utils.constants import (
    DEFAULT_HORIZON_WEIGHT, EXIT_NOT_CONVERGED, EXIT_OK, STATUS_DEGENERATE, STATUS_OK
)
from ..utils.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

MAP_RESIDUAL_COLUMNS = ("id", "image_x", "image_y", "world_x", "world_y",
                        "residual_x", "residual_y", "residual", "status")


class FitCommands:
    """Extrinsic fits from object annotations or from map correspondences"""

    def __init__(self, subparsers):
        self._setup_fit_objects(subparsers)
        self._setup_fit_map(subparsers)

    @staticmethod
    def _add_common(parser, default_free: str) -> None:
        add_config_argument(parser)
        parser.add_argument("--free", default=default_free,
                            help=f"comma-separated free parameters (default: {default_free})")
        parser.add_argument("--initial", default=None,
                            help="initial pose: 'config' and/or key=value pairs, e.g. height=10,tilt=80")
        parser.add_argument("--multistart", action="store_true",
                            help="repeat the fit from several starting tilts and keep the best")
        parser.add_argument("--report", type=Path, default=None,
                            help="JSON report file (default: stdout)")
        parser.add_argument("--save-config", type=Path, default=None,
                            help="write the camera config with the fitted pose (converged fits only)")

    def _setup_fit_objects(self, subparsers) -> None:
        parser = subparsers.add_parser("fit-objects", help="fit the pose to objects of known height")
        self._add_common(parser, "height,tilt,roll")
        parser.add_argument("--annotations", required=True, help="annotation CSV")
        parser.add_argument("--horizon", default=None, help="horizon point CSV")
        parser.add_argument("--weight", type=float, default=DEFAULT_HORIZON_WEIGHT,
                            help="share of the cost carried by the horizon residuals")
        parser.set_defaults(handler=self.fit_objects)

    def _setup_fit_map(self, subparsers) -> None:
        parser = subparsers.add_parser("fit-map", help="fit the pose to image/map correspondences")
        self._add_common(parser, "height,tilt,heading,x,y")
        parser.add_argument("--correspondences", required=True, help="correspondence CSV")
        parser.add_argument("--residuals", type=Path, default=None,
                            help="per-point residual CSV")
        parser.set_defaults(handler=self.fit_map)

    @staticmethod
    def _run(config, initial, free, spec, multistart: bool):
        if multistart:
            return fit_multistart(config.intrinsics, initial, free, spec)
        return fit(config.intrinsics, initial, free, spec)

    @staticmethod
    def _save_config(args, config, result) -> None:
        if args.save_config is None:
            return
        if not result.converged:
            logger.warning("fit did not converge, %s was not written", args.save_config)
            return
        ConfigManager.from_camera(config.intrinsics, result.pose, config.geo_anchor).save(args.save_config)
        logger.info("fitted camera written to %s", args.save_config)

    def fit_objects(self, args) -> int:
        config = load_config(args)
        data = DataManager(config.geo_anchor)
        annotations = data.read_annotations(args.annotations)
        if not annotations:
            raise InvalidInputError(f"{args.annotations}: no annotations")
        horizon = data.read_horizon(args.horizon) if args.horizon else []
        if args.horizon and not horizon:
            raise InvalidInputError(f"{args.horizon}: no horizon points")
        free = parse_free(args.free)
        initial = parse_initial(args.initial, config)
        spec = ResidualSpec(annotations=annotations, horizon_points=horizon, weight_horizon=args.weight)
        result = self._run(config, initial, free, spec, args.multistart)

        report = result.as_dict()
        report["inputs"] = {"annotations": len(annotations), "horizon_points": len(horizon)}
        self._save_config(args, config, result)
        emit(data.write_report(report), args.report)
        return EXIT_OK if result.converged else EXIT_NOT_CONVERGED

    def fit_map(self, args) -> int:
        config = load_config(args)
        data = DataManager(config.geo_anchor)
        correspondences = data.read_correspondences(args.correspondences)
        ids = data.correspondence_ids(args.correspondences)
        free = parse_free(args.free)
        minimum = math.ceil(len(free.names) / 2)
        if len(correspondences) < minimum:
            raise InvalidInputError(
                f"{len(free.names)} free parameters need at least {minimum} correspondences, "
                f"got {len(correspondences)}"
            )
        initial = parse_initial(args.initial, config)
        result = self._run(config, initial, free, ResidualSpec(correspondences=correspondences),
                           args.multistart)

        residuals = map_residuals(config.intrinsics, result.pose, correspondences).values.reshape(-1, 2)
        rows = []
        for cid, c, (rx, ry) in zip(ids, correspondences, residuals):
            status = STATUS_OK if math.isfinite(rx) else STATUS_DEGENERATE
            rows.append((cid, c.image.y1, c.image.y2, c.world.x1, c.world.x2,
                         rx, ry, math.hypot(rx, ry), status))
        if args.residuals:
            data.write_table(rows, MAP_RESIDUAL_COLUMNS, args.residuals)

        report = result.as_dict()
        report["points"] = [dict(zip(MAP_RESIDUAL_COLUMNS, row)) for row in rows]
        if config.geo_anchor is not None:
            lat, lon = camera_position_gps(config.geo_anchor, camera_matrix(config.intrinsics, result.pose))
            report["camera_gps"] = {"lat_deg": lat, "lon_deg": lon}
        self._save_config(args, config, result)
        emit(data.write_report(report), args.report)
        return EXIT_OK if result.converged else EXIT_NOT_CONVERGED
