"""
Exceptions
Error types raised by the geometry, fitting and file layers
"""

from typing import Optional


class CameraGeometryError(ValueError):
    """Base class for all library errors"""


class InvalidParameterError(CameraGeometryError):
    """A parameter is out of its valid range"""


class PointAtCameraPlaneError(CameraGeometryError):
    """The projective scale of a point vanishes"""


class DegenerateRayError(CameraGeometryError):
    """A viewing ray does not meet the constraint plane"""


class DegenerateHorizonError(CameraGeometryError):
    """The horizon cannot be represented in the image plane"""


class InvalidInputError(CameraGeometryError):
    """Input data cannot be used (empty, mixed units, nothing left after exclusion)"""


class UnsupportedLatitudeError(CameraGeometryError):
    """The local equirectangular approximation breaks down near the poles"""


class ConfigError(CameraGeometryError):
    """A camera configuration document is invalid"""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class DataFileError(CameraGeometryError):
    """A delimited data file or raster is invalid"""

    def __init__(self, message: str, path: Optional[str] = None,
                 row: Optional[int] = None, column: Optional[str] = None):
        where = [str(path)] if path else []
        if row is not None:
            where.append(f"row {row}")
        if column:
            where.append(f"column '{column}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.path = path
        self.row = row
        self.column = column
