"""
Helper Functions
Utility functions for the application
"""

import math
from typing import Iterable, Tuple

import numpy as np

from .exceptions import InvalidParameterError


def normalize_angle(degrees: float) -> float:
    """Map an angle to (-180, 180]"""
    value = math.fmod(degrees, 360.0)
    if value <= -180.0:
        value += 360.0
    elif value > 180.0:
        value -= 360.0
    return value


def require_finite(name: str, value: float) -> float:
    """Return value as float, raising if it is NaN or infinite"""
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value}")
    return value


def require_positive(name: str, value: float) -> float:
    """Return value as float, raising unless it is finite and > 0"""
    value = require_finite(name, value)
    if value <= 0.0:
        raise InvalidParameterError(f"{name} must be positive, got {value}")
    return value


def cross2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """z component of the cross product of 2D vectors (broadcasts)"""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def rotate2d(xy: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate 2D points counterclockwise"""
    c, s = math.cos(math.radians(degrees)), math.sin(math.radians(degrees))
    xy = np.asarray(xy, dtype=float)
    return np.stack([c * xy[..., 0] - s * xy[..., 1],
                     s * xy[..., 0] + c * xy[..., 1]], axis=-1)


def derive_seed(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) tuple"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def rms(values: Iterable[float]) -> float:
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        return float("nan")
    return float(np.sqrt(np.mean(values ** 2)))


def linspace_around(center: float, relative_range: float, steps: int) -> np.ndarray:
    """Evenly spaced values over center * (1 -/+ relative_range)"""
    return np.linspace(center * (1.0 - relative_range), center * (1.0 + relative_range), steps)


def parse_point(text: str, dims: int) -> Tuple[float, ...]:
    """Parse an inline 'a,b[,c]' point argument"""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != dims:
        raise InvalidParameterError(f"expected {dims} comma-separated values, got '{text}'")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise InvalidParameterError(f"non-numeric point '{text}'") from None
    for v in values:
        require_finite("point coordinate", v)
    return values
