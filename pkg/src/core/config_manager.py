"""
Configuration Manager
Handles camera configuration documents (intrinsics, pose, optional geo anchor)
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .geo import GeoAnchor
from .projective import Intrinsics, Pose
from ..utils.constants import CONFIG_SECTIONS, REQUIRED_SECTIONS
from ..utils.exceptions import CameraGeometryError, ConfigError

INTEGER_KEYS = ("image_width_px", "image_height_px")


class ConfigManager:
    """Manages one validated camera configuration"""

    def __init__(self, config: Dict[str, Any], path: Optional[Path] = None):
        self.config_path = Path(path) if path else None
        self.config = self._validate(config)
        self._domain = self._build_domain()

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ConfigManager":
        """Load configuration from file"""
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
        return cls(loaded, path)

    @classmethod
    def from_camera(cls, intrinsics: Intrinsics, pose: Pose,
                    anchor: Optional[GeoAnchor] = None) -> "ConfigManager":
        """Build a configuration document from domain objects"""
        config = {
            "intrinsics": {
                "focal_mm": intrinsics.focal_length,
                "sensor_width_mm": intrinsics.sensor_width,
                "sensor_height_mm": intrinsics.sensor_height,
                "image_width_px": intrinsics.image_width,
                "image_height_px": intrinsics.image_height,
            },
            "pose": {
                "height_m": pose.height,
                "tilt_deg": pose.tilt,
                "roll_deg": pose.roll,
                "heading_deg": pose.heading,
                "offset_x_m": pose.offset_x,
                "offset_y_m": pose.offset_y,
            },
        }
        if anchor is not None:
            config["geo_anchor"] = {
                "lat_deg": anchor.latitude,
                "lon_deg": anchor.longitude,
                "bearing_deg": anchor.bearing,
            }
        return cls(config)

    def _validate(self, config: Any) -> Dict[str, Any]:
        if not isinstance(config, dict):
            raise ConfigError("configuration must be a JSON object")
        for section in config:
            if section not in CONFIG_SECTIONS:
                raise ConfigError("unknown section", key=section)
        for section in REQUIRED_SECTIONS:
            if section not in config:
                raise ConfigError("required section is missing", key=section)
        validated = {}
        for section, values in config.items():
            if not isinstance(values, dict):
                raise ConfigError("section must be a JSON object", key=section)
            allowed = CONFIG_SECTIONS[section]
            for key in values:
                if key not in allowed:
                    raise ConfigError("unknown key", key=f"{section}.{key}")
            validated[section] = {}
            for key in allowed:
                dotted = f"{section}.{key}"
                if key not in values:
                    raise ConfigError("required key is missing", key=dotted)
                value = values[key]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"expected a number, got {value!r}", key=dotted)
                if not math.isfinite(value):
                    raise ConfigError("value must be finite", key=dotted)
                if key in INTEGER_KEYS and not float(value).is_integer():
                    raise ConfigError(f"expected a whole number of pixels, got {value!r}", key=dotted)
                validated[section][key] = int(value) if key in INTEGER_KEYS else float(value)
        return validated

    def _build_domain(self) -> Dict[str, Any]:
        domain = {}
        try:
            intr = self.config["intrinsics"]
            domain["intrinsics"] = Intrinsics(
                focal_length=intr["focal_mm"],
                sensor_width=intr["sensor_width_mm"],
                sensor_height=intr["sensor_height_mm"],
                image_width=intr["image_width_px"],
                image_height=intr["image_height_px"],
            )
        except CameraGeometryError as e:
            raise ConfigError(str(e), key="intrinsics") from None
        pose = self.config["pose"]
        domain["pose"] = Pose(
            height=pose["height_m"],
            tilt=pose["tilt_deg"],
            roll=pose["roll_deg"],
            heading=pose["heading_deg"],
            offset_x=pose["offset_x_m"],
            offset_y=pose["offset_y_m"],
        )
        if "geo_anchor" in self.config:
            anchor = self.config["geo_anchor"]
            try:
                domain["geo_anchor"] = GeoAnchor(anchor["lat_deg"], anchor["lon_deg"], anchor["bearing_deg"])
            except CameraGeometryError as e:
                raise ConfigError(str(e), key="geo_anchor") from None
        return domain

    @property
    def intrinsics(self) -> Intrinsics:
        return self._domain["intrinsics"]

    @property
    def pose(self) -> Pose:
        return self._domain["pose"]

    @property
    def geo_anchor(self) -> Optional[GeoAnchor]:
        return self._domain.get("geo_anchor")

    def to_dict(self) -> Dict[str, Any]:
        """Validated document as plain nested dicts"""
        return {section: dict(values) for section, values in self.config.items()}

    def serialize(self) -> str:
        """Canonical JSON text (sorted keys, trailing newline)"""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path: Union[str, Path, None] = None) -> None:
        """Save configuration to file"""
        path = Path(path) if path else self.config_path
        if path is None:
            raise ConfigError("no path to save the configuration to")
        path.write_text(self.serialize(), encoding="utf-8")
        self.config_path = path
