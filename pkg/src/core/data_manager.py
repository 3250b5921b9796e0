"""
Data Manager
Reads and writes annotation, horizon and correspondence tables, reports and rasters
"""

import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from .geo import GeoAnchor, gps_to_world, world_to_gps
from .projective import ImagePoint, TopViewGrid, WorldPoint
from .scene import Correspondence, ObjectAnnotation
from ..utils.constants import (
    ANNOTATION_COLUMNS, CORRESPONDENCE_GEO_COLUMNS, CORRESPONDENCE_METRIC_COLUMNS,
    CSV_DELIMITER, CSV_LINE_END, HORIZON_COLUMNS, IMAGE_POINT_COLUMNS, WORLD_POINT_COLUMNS
)
from ..utils.exceptions import CameraGeometryError, DataFileError, InvalidInputError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
RASTER_SUFFIXES = (".ppm", ".pgm", ".pnm")
RASTER_MODES = ("L", "RGB", "I", "I;16")


def _jsonable(value: Any) -> Any:
    """NaN and infinities become null so reports stay strict JSON"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class DataManager:
    """File access for the command line tools.

    The geo anchor is only needed to read correspondence files given in
    latitude/longitude.
    """

    def __init__(self, anchor: Optional[GeoAnchor] = None):
        self.anchor = anchor

    # Delimited tables

    def _read_table(self, path: PathLike, headers: Sequence[Sequence[str]],
                    id_column: Optional[str] = None) -> pd.DataFrame:
        """Load a table whose header must equal one of headers; other columns are finite numbers"""
        try:
            frame = pd.read_csv(path, sep=CSV_DELIMITER, dtype=str, keep_default_na=False,
                                skipinitialspace=True)
        except FileNotFoundError:
            raise DataFileError("file not found", path) from None
        except pd.errors.EmptyDataError:
            raise DataFileError("file is empty, a header row is required", path) from None
        except pd.errors.ParserError as e:
            raise DataFileError(f"cannot parse: {e}", path) from None
        frame.columns = [c.strip() for c in frame.columns]
        columns = tuple(frame.columns)
        if columns not in [tuple(h) for h in headers]:
            expected = " or ".join(CSV_DELIMITER.join(h) for h in headers)
            raise DataFileError(f"header must be {expected}, got {CSV_DELIMITER.join(columns)}", path)

        for column in columns:
            if column == id_column:
                frame[column] = frame[column].str.strip()
                continue
            values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
            bad = ~np.isfinite(values.to_numpy(dtype=float))
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise DataFileError(f"'{frame[column].iloc[row]}' is not a finite decimal number",
                                    path, row=row + 2, column=column)
            frame[column] = values.astype(float)

        if id_column is not None:
            empty = frame[id_column] == ""
            if empty.any():
                row = int(np.flatnonzero(empty.to_numpy())[0])
                raise DataFileError("id is empty", path, row=row + 2, column=id_column)
            duplicated = frame[id_column].duplicated()
            if duplicated.any():
                row = int(np.flatnonzero(duplicated.to_numpy())[0])
                raise DataFileError(f"duplicate id '{frame[id_column].iloc[row]}'",
                                    path, row=row + 2, column=id_column)
        logger.debug("read %d rows from %s", len(frame), path)
        return frame

    def read_annotations(self, path: PathLike) -> List[ObjectAnnotation]:
        """Foot/head pixel pairs with their known heights"""
        frame = self._read_table(path, [ANNOTATION_COLUMNS], id_column="object_id")
        annotations = []
        for i, row in enumerate(frame.itertuples(index=False)):
            try:
                annotations.append(ObjectAnnotation(
                    foot=ImagePoint(row.foot_x, row.foot_y),
                    head=ImagePoint(row.head_x, row.head_y),
                    known_height=row.height_m,
                ))
            except CameraGeometryError as e:
                raise DataFileError(str(e), path, row=i + 2, column="height_m") from None
        return annotations

    def read_horizon(self, path: PathLike) -> List[ImagePoint]:
        """Clicked horizon pixels"""
        frame = self._read_table(path, [HORIZON_COLUMNS])
        return [ImagePoint(x, y) for x, y in zip(frame["image_x"], frame["image_y"])]

    def read_correspondences(self, path: PathLike) -> List[Correspondence]:
        """Metric (world_x, world_y) or geographic (lat, lon) correspondences; the header decides"""
        frame = self._read_table(path, [CORRESPONDENCE_METRIC_COLUMNS, CORRESPONDENCE_GEO_COLUMNS],
                                 id_column="id")
        geographic = "lat" in frame.columns
        if geographic and self.anchor is None:
            raise InvalidInputError(
                f"{path}: correspondences are given as lat/lon but the camera config has no geo_anchor"
            )
        correspondences = []
        for i, row in enumerate(frame.itertuples(index=False)):
            try:
                if geographic:
                    world = gps_to_world(self.anchor, row.lat, row.lon)
                else:
                    world = WorldPoint(row.world_x, row.world_y, 0.0)
            except CameraGeometryError as e:
                raise DataFileError(str(e), path, row=i + 2) from None
            correspondences.append(Correspondence(ImagePoint(row.image_x, row.image_y), world))
        return correspondences

    def correspondence_ids(self, path: PathLike) -> List[str]:
        """Point ids in file order"""
        frame = self._read_table(path, [CORRESPONDENCE_METRIC_COLUMNS, CORRESPONDENCE_GEO_COLUMNS],
                                 id_column="id")
        return list(frame["id"])

    def read_world_points(self, path: PathLike) -> np.ndarray:
        return self._read_table(path, [WORLD_POINT_COLUMNS]).to_numpy(dtype=float).reshape(-1, 3)

    def read_image_points(self, path: PathLike) -> np.ndarray:
        return self._read_table(path, [IMAGE_POINT_COLUMNS]).to_numpy(dtype=float).reshape(-1, 2)

    def write_table(self, rows: Sequence[Sequence[Any]], columns: Sequence[str],
                    path: Optional[PathLike] = None) -> str:
        """Write rows as CSV; returns the text, and also stores it when a path is given"""
        frame = pd.DataFrame(list(rows), columns=list(columns))
        buffer = io.StringIO()
        frame.to_csv(buffer, sep=CSV_DELIMITER, index=False, lineterminator=CSV_LINE_END)
        text = buffer.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="")
            logger.info("wrote %d rows to %s", len(frame), path)
        return text

    def write_annotations(self, annotations: Sequence[ObjectAnnotation], path: PathLike) -> str:
        """Annotation CSV with generated object ids"""
        rows = [(f"obj{i + 1:03d}", a.foot.y1, a.foot.y2, a.head.y1, a.head.y2, a.known_height)
                for i, a in enumerate(annotations)]
        return self.write_table(rows, ANNOTATION_COLUMNS, path)

    def write_horizon(self, points: Sequence[ImagePoint], path: PathLike) -> str:
        return self.write_table([(p.y1, p.y2) for p in points], HORIZON_COLUMNS, path)

    def write_correspondences(self, correspondences: Sequence[Correspondence], path: PathLike,
                              geographic: bool = False) -> str:
        """Metric table, or lat/lon table through the geo anchor"""
        if geographic:
            if self.anchor is None:
                raise InvalidInputError("lat/lon output needs a geo_anchor")
            rows = [(f"p{i + 1}", c.image.y1, c.image.y2, *world_to_gps(self.anchor, c.world))
                    for i, c in enumerate(correspondences)]
            return self.write_table(rows, CORRESPONDENCE_GEO_COLUMNS, path)
        rows = [(f"p{i + 1}", c.image.y1, c.image.y2, c.world.x1, c.world.x2)
                for i, c in enumerate(correspondences)]
        return self.write_table(rows, CORRESPONDENCE_METRIC_COLUMNS, path)

    def write_topview_grid(self, grid: TopViewGrid, path: Optional[PathLike] = None) -> str:
        """One row per cell: row, col, ground centre and source pixel (empty when unmapped)"""
        ny, nx = grid.shape
        rows_idx, cols_idx = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
        frame = pd.DataFrame({
            "row": rows_idx.ravel(),
            "col": cols_idx.ravel(),
            "x": np.broadcast_to(grid.x_centers[None, :], (ny, nx)).ravel(),
            "y": np.broadcast_to(grid.y_centers[:, None], (ny, nx)).ravel(),
            "y1": grid.pixels[..., 0].ravel(),
            "y2": grid.pixels[..., 1].ravel(),
        })
        return self.write_table(frame.itertuples(index=False, name=None), frame.columns, path)

    # Reports

    def write_report(self, report: Dict[str, Any], path: Optional[PathLike] = None) -> str:
        """JSON report with sorted keys; NaN becomes null"""
        text = json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="")
            logger.info("wrote report to %s", path)
        return text

    # Rasters

    def read_raster(self, path: PathLike) -> np.ndarray:
        """PPM/PGM (plain or binary) as an array of shape (rows, cols[, 3])"""
        try:
            with Image.open(path) as image:
                if image.format not in ("PPM",):
                    raise DataFileError(f"unsupported raster format {image.format}, expected PPM/PGM", path)
                if image.mode == "1":
                    image = image.convert("L")
                if image.mode not in RASTER_MODES:
                    raise DataFileError(f"unsupported raster mode {image.mode}", path)
                return np.array(image)
        except FileNotFoundError:
            raise DataFileError("file not found", path) from None
        except UnidentifiedImageError:
            raise DataFileError("not a PPM/PGM raster", path) from None

    def write_raster(self, array: np.ndarray, path: PathLike) -> None:
        """Binary PGM for 2D arrays, binary PPM for (rows, cols, 3)"""
        if Path(path).suffix.lower() not in RASTER_SUFFIXES:
            raise DataFileError(f"raster output must end in one of {RASTER_SUFFIXES}", path)
        array = np.asarray(array)
        if array.ndim == 3 and array.shape[2] != 3:
            raise DataFileError(f"cannot store {array.shape[2]} channels as PPM/PGM", path)
        if array.dtype != np.uint8 and array.ndim == 2 and array.max(initial=0) > 255:
            image = Image.fromarray(array.astype(np.uint16))
        else:
            image = Image.fromarray(array.astype(np.uint8))
        image.save(path, format="PPM")
        logger.info("wrote %dx%d raster to %s", array.shape[1], array.shape[0], path)
