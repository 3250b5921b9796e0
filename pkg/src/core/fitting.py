"""
Parameter Fitting
Extrinsic parameter estimation from object heights, horizon points and map correspondences
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .projective import (
    ImagePoint, Intrinsics, Pose, backproject_points, camera_matrix, horizon_distance,
    horizon_line, project_points
)
from .scene import Correspondence, ObjectAnnotation, reconstruct_height
from ..utils.constants import (
    DEFAULT_HORIZON_WEIGHT, EXCLUDED_RESIDUAL_PENALTY, FIT_PARAMETERS, LM_ABSOLUTE_COST,
    LM_COST_TOLERANCE, LM_DAMPING_FACTOR, LM_INITIAL_DAMPING, LM_MAX_DAMPING,
    LM_MAX_ITERATIONS, LM_PROBE_RANK_TOLERANCE, LM_PROBE_STEP, LM_RANK_TOLERANCE,
    LM_RELATIVE_STEP, LM_STEP_TOLERANCE, MULTISTART_TILTS_DEG, VIEW_SIGN
)
from ..utils.exceptions import (
    CameraGeometryError, DegenerateHorizonError, DegenerateRayError, InvalidInputError,
    InvalidParameterError
)
from ..utils.helpers import derive_seed, rms

logger = logging.getLogger(__name__)

PARAMETER_ALIASES = {"x": "offset_x", "y": "offset_y"}

OBJECTS = "objects"
HORIZON = "horizon"
MAP = "map"

RANK_DEFICIENT = "jacobian is rank-deficient for the free parameters"

__all__ = [
    "Correspondence", "FitResult", "FreeMask", "ResidualSpec", "Residuals", "StudyLevel",
    "StudyRow", "StudySummary", "combined_cost", "fit", "fit_multistart",
    "horizon_residuals", "map_residuals", "object_residuals", "subset_study",
    "summarize_study",
]


@dataclass(frozen=True)
class FreeMask:
    """Which pose parameters the fit may change"""

    height: bool = False
    tilt: bool = False
    roll: bool = False
    heading: bool = False
    offset_x: bool = False
    offset_y: bool = False

    def __post_init__(self):
        if not any(getattr(self, name) for name in FIT_PARAMETERS):
            raise InvalidParameterError("at least one parameter must be free")

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "FreeMask":
        flags = {}
        for name in names:
            name = PARAMETER_ALIASES.get(name.strip(), name.strip())
            if name not in FIT_PARAMETERS:
                raise InvalidParameterError(f"unknown parameter '{name}', expected one of {FIT_PARAMETERS}")
            flags[name] = True
        return cls(**flags)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name in FIT_PARAMETERS if getattr(self, name))


@dataclass(frozen=True, eq=False)
class Residuals:
    """Residual components of one family; NaN marks excluded items"""

    values: np.ndarray
    supplied: int
    excluded: int

    @property
    def used(self) -> int:
        return self.supplied - self.excluded

    def valid_values(self) -> np.ndarray:
        return self.values[np.isfinite(self.values)]


@dataclass(frozen=True)
class ResidualSpec:
    """Observations a fit is driven by"""

    annotations: Sequence[ObjectAnnotation] = ()
    horizon_points: Sequence[ImagePoint] = ()
    correspondences: Sequence[Correspondence] = ()
    weight_horizon: float = DEFAULT_HORIZON_WEIGHT

    def __post_init__(self):
        for name in ("annotations", "horizon_points", "correspondences"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not 0.0 <= self.weight_horizon <= 1.0:
            raise InvalidParameterError(f"horizon weight must lie in [0, 1], got {self.weight_horizon}")
        if self.correspondences and (self.annotations or self.horizon_points):
            # pixel and metre residuals have no common scale
            raise InvalidInputError("map correspondences cannot be combined with object or horizon residuals")
        if not (self.annotations or self.horizon_points or self.correspondences):
            raise InvalidInputError("no observations to fit")

    @property
    def families(self) -> Tuple[str, ...]:
        present = []
        if self.annotations:
            present.append(OBJECTS)
        if self.horizon_points:
            present.append(HORIZON)
        if self.correspondences:
            present.append(MAP)
        return tuple(present)


@dataclass
class FitResult:
    pose: Pose
    free: Tuple[str, ...]
    converged: bool
    iterations: int
    cost: float
    rms: Dict[str, float]
    excluded: Dict[str, int]
    standard_errors: Dict[str, float]
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "pose": self.pose.as_dict(),
            "free": list(self.free),
            "converged": self.converged,
            "iterations": self.iterations,
            "cost": self.cost,
            "rms": dict(self.rms),
            "excluded": dict(self.excluded),
            "standard_errors": dict(self.standard_errors),
            "message": self.message,
        }


@dataclass(frozen=True)
class StudyRow:
    n: int
    repeat: int
    height: float
    tilt: float
    converged: bool
    height_err_mean: float
    height_err_std: float
    indices: Tuple[int, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class StudyLevel:
    n: int
    height_mean: float
    height_std: float
    tilt_mean: float
    tilt_std: float


@dataclass(frozen=True)
class StudySummary:
    levels: List[StudyLevel]
    height_trend: Tuple[float, float]
    tilt_trend: Tuple[float, float]


def _object_block(intr: Intrinsics, pose: Pose, annotations: Sequence[ObjectAnnotation]) -> Residuals:
    n = len(annotations)
    values = np.full((n, 2), np.nan)
    if n == 0:
        return Residuals(values.ravel(), 0, 0)
    cam = camera_matrix(intr, pose)
    feet = np.array([a.foot.as_array() for a in annotations])
    observed = np.array([a.head.as_array() for a in annotations])
    lift = np.array([a.known_height for a in annotations])
    try:
        base, front, valid = backproject_points(cam, feet, "x3", 0.0)
    except DegenerateRayError:
        return Residuals(values.ravel(), n, n)
    tops = base.copy()
    tops[:, 2] += lift
    predicted, scale = project_points(cam, np.nan_to_num(tops))
    ok = front & valid & (scale * VIEW_SIGN > 0.0) & np.all(np.isfinite(predicted), axis=1)
    values[ok] = predicted[ok] - observed[ok]
    return Residuals(values.ravel(), n, int((~ok).sum()))


def _horizon_block(intr: Intrinsics, pose: Pose, points: Sequence[ImagePoint]) -> Residuals:
    line = horizon_line(camera_matrix(intr, pose))
    values = horizon_distance(line, np.array([p.as_array() for p in points]).reshape(-1, 2))
    return Residuals(np.asarray(values, dtype=float), len(points), 0)


def _map_block(intr: Intrinsics, pose: Pose, correspondences: Sequence[Correspondence]) -> Residuals:
    n = len(correspondences)
    values = np.full((n, 2), np.nan)
    if n == 0:
        return Residuals(values.ravel(), 0, 0)
    cam = camera_matrix(intr, pose)
    pixels = np.array([c.image.as_array() for c in correspondences])
    world = np.array([[c.world.x1, c.world.x2] for c in correspondences])
    try:
        ground, front, valid = backproject_points(cam, pixels, "x3", 0.0)
    except DegenerateRayError:
        return Residuals(values.ravel(), n, n)
    ok = front & valid
    values[ok] = ground[ok, :2] - world[ok]
    return Residuals(values.ravel(), n, int((~ok).sum()))


def _warn_excluded(family: str, block: Residuals) -> None:
    if block.excluded:
        logger.warning("%s: %d of %d items excluded (degenerate or behind the camera)",
                       family, block.excluded, block.supplied)


def object_residuals(intr: Intrinsics, pose: Pose, annotations: Sequence[ObjectAnnotation]) -> Residuals:
    """Predicted minus observed head pixel, two components per annotation"""
    block = _object_block(intr, pose, annotations)
    _warn_excluded(OBJECTS, block)
    return block


def horizon_residuals(intr: Intrinsics, pose: Pose, horizon_points: Sequence[ImagePoint]) -> Residuals:
    """Signed pixel distance of each clicked point to the horizon of the pose"""
    if not horizon_points:
        raise InvalidInputError("at least one horizon point is needed")
    try:
        return _horizon_block(intr, pose, horizon_points)
    except DegenerateHorizonError as e:
        raise DegenerateHorizonError(f"all {len(horizon_points)} horizon points excluded: {e}") from e


def map_residuals(intr: Intrinsics, pose: Pose, correspondences: Sequence[Correspondence]) -> Residuals:
    """Back-projected image point minus map point, in metres"""
    block = _map_block(intr, pose, correspondences)
    _warn_excluded(MAP, block)
    return block


def combined_cost(object_res: np.ndarray, horizon_res: np.ndarray,
                  weight_horizon: float = DEFAULT_HORIZON_WEIGHT) -> float:
    """(1 - w) * mean(object^2) + w * mean(horizon^2); an empty family hands its weight over"""
    object_res = np.asarray(object_res, dtype=float).ravel()
    horizon_res = np.asarray(horizon_res, dtype=float).ravel()
    if object_res.size == 0 and horizon_res.size == 0:
        raise InvalidInputError("both residual families are empty")
    if horizon_res.size == 0:
        return float(np.mean(object_res ** 2))
    if object_res.size == 0:
        return float(np.mean(horizon_res ** 2))
    return float((1.0 - weight_horizon) * np.mean(object_res ** 2)
                 + weight_horizon * np.mean(horizon_res ** 2))


class _Problem:
    """Weighted, fixed-length residual vector over the free parameters"""

    def __init__(self, intr: Intrinsics, base_pose: Pose, free: FreeMask, spec: ResidualSpec):
        self.intr = intr
        self.base_pose = base_pose
        self.free = free.names
        self.spec = spec
        self.sizes = {
            OBJECTS: 2 * len(spec.annotations),
            HORIZON: len(spec.horizon_points),
            MAP: 2 * len(spec.correspondences),
        }
        w = spec.weight_horizon
        if spec.annotations and spec.horizon_points:
            fractions = {OBJECTS: 1.0 - w, HORIZON: w}
        else:
            fractions = {family: 1.0 for family in spec.families}
        self.weights = {family: np.sqrt(fractions[family] / self.sizes[family])
                        for family in spec.families}
        self.size = sum(self.sizes[family] for family in spec.families)

    def start(self) -> np.ndarray:
        return np.array([getattr(self.base_pose, name) for name in self.free], dtype=float)

    def pose(self, params: np.ndarray) -> Pose:
        return self.base_pose.with_values(**{name: float(v) for name, v in zip(self.free, params)})

    def blocks(self, pose: Pose) -> Dict[str, Residuals]:
        blocks = {}
        if self.spec.annotations:
            blocks[OBJECTS] = _object_block(self.intr, pose, self.spec.annotations)
        if self.spec.horizon_points:
            try:
                blocks[HORIZON] = _horizon_block(self.intr, pose, self.spec.horizon_points)
            except CameraGeometryError:
                n = len(self.spec.horizon_points)
                blocks[HORIZON] = Residuals(np.full(n, np.nan), n, n)
        if self.spec.correspondences:
            blocks[MAP] = _map_block(self.intr, pose, self.spec.correspondences)
        return blocks

    def evaluate(self, params: np.ndarray) -> Tuple[np.ndarray, int]:
        """Weighted residual vector and the number of penalised components"""
        try:
            pose = self.pose(params)
        except CameraGeometryError:
            pose = None
        if pose is None or pose.height <= 0.0:
            return np.full(self.size, EXCLUDED_RESIDUAL_PENALTY), self.size
        parts = []
        penalised = 0
        for family, block in self.blocks(pose).items():
            missing = ~np.isfinite(block.values)
            penalised += int(missing.sum())
            values = np.where(missing, EXCLUDED_RESIDUAL_PENALTY, block.values)
            parts.append(self.weights[family] * values)
        return np.concatenate(parts), penalised

    def vector(self, params: np.ndarray) -> np.ndarray:
        return self.evaluate(params)[0]

    def jacobian(self, params: np.ndarray, residual: np.ndarray,
                 relative_step: float = LM_RELATIVE_STEP) -> np.ndarray:
        """Forward differences with a relative step"""
        jac = np.empty((self.size, len(params)))
        for j in range(len(params)):
            step = relative_step * max(abs(params[j]), 1.0)
            shifted = params.copy()
            shifted[j] += step
            jac[:, j] = (self.vector(shifted) - residual) / step
        return jac

    def identifiable(self, params: np.ndarray, residual: np.ndarray) -> bool:
        """False when some free parameter does not move the residuals.

        A coarse step keeps rounding noise out of the columns of parameters
        the residuals ignore, which the fine iteration step cannot.
        """
        singular = np.linalg.svd(self.jacobian(params, residual, LM_PROBE_STEP), compute_uv=False)
        return singular[0] > 0.0 and singular[-1] >= LM_PROBE_RANK_TOLERANCE * singular[0]


def _standard_errors(jac: np.ndarray, cost: float, damping: float) -> np.ndarray:
    m, n = jac.shape
    if m <= n:
        return np.full(n, np.nan)
    normal = jac.T @ jac
    normal = normal + damping * np.diag(np.diag(normal))
    covariance = cost / (m - n) * np.linalg.pinv(normal)
    return np.sqrt(np.clip(np.diag(covariance), 0.0, None))


def fit(intr: Intrinsics, initial: Pose, free: FreeMask, residual_spec: ResidualSpec) -> FitResult:
    """Levenberg-Marquardt estimate of the free pose parameters.

    Angles are fitted in degrees next to metres (1 deg <-> 1 m). Items that
    are excluded at a trial pose contribute a fixed penalty so the residual
    vector keeps its length. Non-convergence is reported, not raised.
    """
    if initial.height <= 0.0:
        raise InvalidInputError(f"initial height must be positive, got {initial.height}")
    problem = _Problem(intr, initial, free, residual_spec)
    n_free = len(problem.free)
    if n_free > problem.size:
        raise InvalidInputError(
            f"{n_free} free parameters need at least {n_free} residual components, got {problem.size}"
        )
    start_blocks = problem.blocks(initial)
    if all(block.used == 0 for block in start_blocks.values()):
        raise InvalidInputError("every observation is excluded at the initial pose")

    params = problem.start()
    residual = problem.vector(params)
    cost = float(residual @ residual)
    damping = LM_INITIAL_DAMPING
    iterations = 0
    converged = cost <= LM_ABSOLUTE_COST
    message = "exact fit" if converged else ""
    if not converged and not problem.identifiable(params, residual):
        message = RANK_DEFICIENT

    while not converged and not message and iterations < LM_MAX_ITERATIONS:
        iterations += 1
        jac = problem.jacobian(params, residual)
        singular = np.linalg.svd(jac, compute_uv=False)
        if singular[0] == 0.0 or singular[-1] < LM_RANK_TOLERANCE * singular[0]:
            message = RANK_DEFICIENT
            break
        normal = jac.T @ jac
        gradient = jac.T @ residual
        scaling = np.diag(np.diag(normal))
        while True:
            step = np.linalg.solve(normal + damping * scaling, -gradient)
            trial = params + step
            trial_residual, penalised = problem.evaluate(trial)
            trial_cost = float(trial_residual @ trial_residual)
            largest = float(np.max(np.abs(step)))
            if trial_cost < cost:
                relative = (cost - trial_cost) / cost
                params, residual, cost = trial, trial_residual, trial_cost
                damping /= LM_DAMPING_FACTOR
                logger.debug("iteration %d: cost %.6e, damping %.1e", iterations, cost, damping)
                # a penalised cost is dominated by constants; keep iterating
                if cost <= LM_ABSOLUTE_COST or (not penalised and (
                        relative < LM_COST_TOLERANCE or largest < LM_STEP_TOLERANCE)):
                    converged = True
                    message = "converged"
                break
            damping *= LM_DAMPING_FACTOR
            if largest < LM_STEP_TOLERANCE:
                converged = True
                message = "converged (no further decrease)"
                break
            if damping > LM_MAX_DAMPING:
                message = "damping limit reached"
                break
    if not converged and not message:
        message = f"no convergence within {LM_MAX_ITERATIONS} iterations"

    pose = problem.pose(params)
    final_blocks = problem.blocks(pose)
    for family, block in final_blocks.items():
        _warn_excluded(family, block)
    if not converged:
        logger.warning("fit of %s did not converge: %s", ",".join(problem.free), message)
    jac = problem.jacobian(params, residual)
    errors = _standard_errors(jac, cost, damping)
    return FitResult(
        pose=pose,
        free=problem.free,
        converged=converged,
        iterations=iterations,
        cost=cost,
        rms={family: rms(block.valid_values()) for family, block in final_blocks.items()},
        excluded={family: block.excluded for family, block in final_blocks.items()},
        standard_errors={name: float(e) for name, e in zip(problem.free, errors)},
        message=message,
    )


def fit_multistart(intr: Intrinsics, initial: Pose, free: FreeMask, residual_spec: ResidualSpec,
                   tilts: Sequence[float] = MULTISTART_TILTS_DEG) -> FitResult:
    """Best fit over a grid of starting tilts (converged results first, then lowest cost)"""
    results = []
    for tilt in tilts:
        result = fit(intr, initial.with_values(tilt=tilt), free, residual_spec)
        logger.info("start tilt %.1f: cost %.6e, converged %s", tilt, result.cost, result.converged)
        results.append(result)
    return min(results, key=lambda r: (not r.converged, r.cost))


def _height_errors(intr: Intrinsics, pose: Pose,
                   annotations: Sequence[ObjectAnnotation]) -> Tuple[float, float]:
    cam = camera_matrix(intr, pose)
    errors = []
    for annotation in annotations:
        measured = reconstruct_height(cam, annotation.foot, annotation.head)
        if measured.ok:
            errors.append(measured.height - annotation.known_height)
    if not errors:
        return float("nan"), float("nan")
    return float(np.mean(errors)), float(np.std(errors))


def subset_study(intr: Intrinsics, annotations: Sequence[ObjectAnnotation], initial: Pose,
                 free: FreeMask, horizon_points: Optional[Sequence[ImagePoint]] = None,
                 repeats: int = 10, seed: int = 0, n_values: Optional[Sequence[int]] = None,
                 weight_horizon: float = DEFAULT_HORIZON_WEIGHT) -> List[StudyRow]:
    """Fit on random subsets (without replacement) of growing size.

    Each (n, repeat) draws from its own generator seeded by (seed, n, repeat);
    subset indices are sorted so the full set always yields the same fit.
    Reconstructed-height errors are evaluated over all annotations.
    """
    if repeats < 1:
        raise InvalidParameterError(f"repeats must be >= 1, got {repeats}")
    if not annotations:
        raise InvalidInputError("the study needs at least one annotation")
    total = len(annotations)
    n_values = list(n_values) if n_values is not None else list(range(1, total + 1))
    for n in n_values:
        if not 1 <= n <= total:
            raise InvalidParameterError(f"subset size {n} outside 1..{total}")
    rows = []
    for n in n_values:
        for repeat in range(repeats):
            indices = np.sort(derive_seed(seed, n, repeat).choice(total, size=n, replace=False))
            spec = ResidualSpec(annotations=[annotations[i] for i in indices],
                                horizon_points=horizon_points or (),
                                weight_horizon=weight_horizon)
            try:
                result = fit(intr, initial, free, spec)
            except InvalidInputError as e:
                logger.warning("n=%d repeat=%d: %s", n, repeat, e)
                rows.append(StudyRow(n, repeat, float("nan"), float("nan"), False,
                                     float("nan"), float("nan"), tuple(int(i) for i in indices)))
                continue
            err_mean, err_std = _height_errors(intr, result.pose, annotations)
            rows.append(StudyRow(n, repeat, result.pose.height, result.pose.tilt, result.converged,
                                 err_mean, err_std, tuple(int(i) for i in indices)))
    return rows


def summarize_study(rows: Sequence[StudyRow]) -> StudySummary:
    """Per-n spread of the fitted parameters and its Spearman trend against n"""
    levels = []
    for n in sorted({row.n for row in rows}):
        heights = np.array([r.height for r in rows if r.n == n and np.isfinite(r.height)])
        tilts = np.array([r.tilt for r in rows if r.n == n and np.isfinite(r.tilt)])
        levels.append(StudyLevel(
            n=n,
            height_mean=float(np.mean(heights)) if heights.size else float("nan"),
            height_std=float(np.std(heights)) if heights.size else float("nan"),
            tilt_mean=float(np.mean(tilts)) if tilts.size else float("nan"),
            tilt_std=float(np.std(tilts)) if tilts.size else float("nan"),
        ))

    def trend(values: List[float]) -> Tuple[float, float]:
        ns = [level.n for level in levels]
        if len(levels) < 3:
            return float("nan"), float("nan")
        result = stats.spearmanr(ns, values)
        return float(result[0]), float(result[1])

    return StudySummary(
        levels=levels,
        height_trend=trend([level.height_std for level in levels]),
        tilt_trend=trend([level.tilt_std for level in levels]),
    )
