"""
Study Commands
Perturbation sweep of apparent heights and the object-count subset study
"""

import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .common import (
    add_config_argument, add_output_argument, emit, load_config, parse_floats, parse_free,
    parse_initial, parse_ints, rows_as_tuples
)
from ..core.data_manager import DataManager
from ..core.fitting import subset_study, summarize_study
from ..core.projective import camera_matrix
from ..core.scene import annotate, perturbation_sweep, place_objects, sample_horizon
from ..utils.constants import (
    DEFAULT_HORIZON_POINTS, DEFAULT_HORIZON_WEIGHT, DEFAULT_NOISE_SIGMA_PX,
    DEFAULT_OBJECT_HEIGHT_M, DEFAULT_SWEEP_DISTANCES_M, DEFAULT_SWEEP_RANGE,
    DEFAULT_SWEEP_STEPS, EXIT_OK, STUDY_COLUMNS, SWEEP_COLUMNS
)
from ..utils.exceptions import InvalidInputError
from ..utils.plotting import plot_study, plot_sweep

logger = logging.getLogger(__name__)

STUDY_NEAR_M = 50.0
STUDY_FAR_M = 150.0
STUDY_OBJECTS = 15


class StudyCommands:
    """Synthetic experiments on the configured camera"""

    def __init__(self, subparsers):
        self._setup_sweep(subparsers)
        self._setup_study(subparsers)

    def _setup_sweep(self, subparsers) -> None:
        parser = subparsers.add_parser("sweep", help="apparent heights under perturbed height and tilt")
        add_config_argument(parser)
        parser.add_argument("--range", type=float, default=DEFAULT_SWEEP_RANGE, dest="relative_range",
                            help="relative perturbation range (default 0.10 for +-10%%)")
        parser.add_argument("--steps", type=int, default=DEFAULT_SWEEP_STEPS, help="values per parameter")
        parser.add_argument("--distances", default=",".join(f"{d:g}" for d in DEFAULT_SWEEP_DISTANCES_M),
                            help="object distances in metres")
        parser.add_argument("--object-height", type=float, default=DEFAULT_OBJECT_HEIGHT_M)
        parser.add_argument("--plot", type=Path, default=None, help="figure file (PNG)")
        add_output_argument(parser)
        parser.set_defaults(handler=self.sweep)

    def _setup_study(self, subparsers) -> None:
        parser = subparsers.add_parser("study", help="fit spread against the number of annotated objects")
        add_config_argument(parser)
        parser.add_argument("--repeats", type=int, required=True)
        parser.add_argument("--seed", type=int, required=True)
        parser.add_argument("--annotations", default=None,
                            help="annotation CSV (default: synthesise objects on the configured camera)")
        parser.add_argument("--horizon", default=None, help="horizon point CSV")
        parser.add_argument("--with-horizon", action="store_true",
                            help="add synthetic horizon points when synthesising")
        parser.add_argument("--distances", default=None,
                            help="distances of synthesised objects in metres (default: 15 from 50 to 150)")
        parser.add_argument("--noise", type=float, default=DEFAULT_NOISE_SIGMA_PX,
                            help="click noise sigma in pixels for synthesised data")
        parser.add_argument("--sizes", default=None, help="subset sizes, e.g. 2-15 (default: 1..N)")
        parser.add_argument("--free", default="height,tilt")
        parser.add_argument("--initial", default=None)
        parser.add_argument("--weight", type=float, default=DEFAULT_HORIZON_WEIGHT)
        parser.add_argument("--summary", type=Path, default=None, help="JSON trend summary")
        parser.add_argument("--plot", type=Path, default=None, help="figure file (PNG)")
        add_output_argument(parser)
        parser.set_defaults(handler=self.study)

    def sweep(self, args) -> int:
        config = load_config(args)
        cam = camera_matrix(config.intrinsics, config.pose)
        distances = parse_floats(args.distances, "--distances")
        rows = []
        for parameter in ("height", "tilt"):
            rows.extend(perturbation_sweep(cam, parameter, args.relative_range, args.steps,
                                           distances, args.object_height))
        emit(DataManager().write_table(rows_as_tuples(rows, SWEEP_COLUMNS), SWEEP_COLUMNS), args.output)
        if args.plot:
            plot_sweep(rows, args.plot)
        return EXIT_OK

    def study(self, args) -> int:
        config = load_config(args)
        data = DataManager(config.geo_anchor)
        cam = camera_matrix(config.intrinsics, config.pose)
        if args.annotations:
            annotations = data.read_annotations(args.annotations)
        else:
            distances = (parse_floats(args.distances, "--distances") if args.distances
                         else np.linspace(STUDY_NEAR_M, STUDY_FAR_M, STUDY_OBJECTS))
            scene = place_objects(distances)
            annotations = annotate(cam, scene, args.noise, args.seed).annotations
        if not annotations:
            raise InvalidInputError("the study needs at least one annotation")
        horizon = []
        if args.horizon:
            horizon = data.read_horizon(args.horizon)
        elif args.with_horizon:
            horizon = sample_horizon(cam, DEFAULT_HORIZON_POINTS, args.noise, args.seed)

        sizes = parse_ints(args.sizes, "--sizes") if args.sizes else None
        rows = subset_study(config.intrinsics, annotations, parse_initial(args.initial, config),
                            parse_free(args.free), horizon_points=horizon, repeats=args.repeats,
                            seed=args.seed, n_values=sizes, weight_horizon=args.weight)
        emit(data.write_table(rows_as_tuples(rows, STUDY_COLUMNS), STUDY_COLUMNS), args.output)

        summary = summarize_study(rows)
        logger.info("height std trend rho=%.3f p=%.3g, tilt std trend rho=%.3f p=%.3g",
                    *summary.height_trend, *summary.tilt_trend)
        if args.summary:
            data.write_report({
                "levels": [asdict(level) for level in summary.levels],
                "height_trend": {"rho": summary.height_trend[0], "p": summary.height_trend[1]},
                "tilt_trend": {"rho": summary.tilt_trend[0], "p": summary.tilt_trend[1]},
            }, args.summary)
        if args.plot:
            plot_study(rows, args.plot)
        return EXIT_OK
