"""
Application Constants
Centralized defaults, tolerances and file formats
"""

# Reference camera (14 mm lens, 17.3x9.7 mm sensor, 4608x2592 px, 20 m, tilt 80 deg)
REFERENCE_FOCAL_MM = 14.0
REFERENCE_SENSOR_WIDTH_MM = 17.3
REFERENCE_SENSOR_HEIGHT_MM = 9.7
REFERENCE_IMAGE_WIDTH_PX = 4608
REFERENCE_IMAGE_HEIGHT_PX = 2592
REFERENCE_HEIGHT_M = 20.0
REFERENCE_TILT_DEG = 80.0

# The printed extrinsic convention looks down the negative camera z axis:
# points in front of the camera have a negative projective scale.
VIEW_SIGN = -1.0

# Numerical tolerances
PLANE_SCALE_TOL = 1e-12          # |p_im3| below this: point on the camera plane
DEGENERATE_DET_TOL = 1e-12       # normalised |det C~| below this: singular reduction
DEGENERATE_PIXEL_TOL = 1e-9      # px distance to a vanishing line treated as on it
HORIZON_TOL = 1e-12              # horizon at infinity when |(a, b)| <= tol * |c|
LINE_POINT_TOL = 1e-9            # px, minimum separation of line generator points
GRID_MULTIPLE_TOL = 1e-6         # relative slack of extent / resolution against a whole cell count
MAX_GEO_DISTANCE_M = 100_000.0
MAX_GEO_LATITUDE_DEG = 89.9
EARTH_RADIUS_M = 6_371_000.0

# Scene synthesis
DEFAULT_OBJECT_HEIGHT_M = 1.0
DEFAULT_OBJECT_WIDTH_M = 0.3
DEFAULT_NOISE_SIGMA_PX = 1.0
DEFAULT_SWEEP_DISTANCES_M = (50.0, 100.0, 150.0, 200.0, 250.0, 300.0)
DEFAULT_SWEEP_RANGE = 0.10
DEFAULT_SWEEP_STEPS = 5
DEFAULT_HORIZON_POINTS = 10

# Fitting
FIT_PARAMETERS = ("height", "tilt", "roll", "heading", "offset_x", "offset_y")
DEFAULT_HORIZON_WEIGHT = 0.5
LM_INITIAL_DAMPING = 1e-3
LM_DAMPING_FACTOR = 10.0
LM_MAX_DAMPING = 1e16
LM_MAX_ITERATIONS = 200
LM_RELATIVE_STEP = 1e-6
LM_COST_TOLERANCE = 1e-10        # relative cost change
LM_STEP_TOLERANCE = 1e-10        # max parameter step
LM_ABSOLUTE_COST = 1e-20         # cost treated as an exact fit
LM_RANK_TOLERANCE = 1e-8         # relative singular value cut-off
LM_PROBE_STEP = 1e-3             # relative step of the identifiability probe
LM_PROBE_RANK_TOLERANCE = 1e-6
EXCLUDED_RESIDUAL_PENALTY = 1e6  # stands in for an excluded residual during a fit
DEFAULT_INITIAL_POSE = {
    "height": 10.0,
    "tilt": 80.0,
    "roll": 0.0,
    "heading": 0.0,
    "offset_x": 0.0,
    "offset_y": 0.0,
}
MULTISTART_TILTS_DEG = (45.0, 60.0, 75.0, 85.0)

# Configuration file keys
CONFIG_SECTIONS = {
    "intrinsics": ("focal_mm", "sensor_width_mm", "sensor_height_mm",
                   "image_width_px", "image_height_px"),
    "pose": ("height_m", "tilt_deg", "roll_deg", "heading_deg",
             "offset_x_m", "offset_y_m"),
    "geo_anchor": ("lat_deg", "lon_deg", "bearing_deg"),
}
REQUIRED_SECTIONS = ("intrinsics", "pose")

# Delimited file columns
ANNOTATION_COLUMNS = ("object_id", "foot_x", "foot_y", "head_x", "head_y", "height_m")
CORRESPONDENCE_METRIC_COLUMNS = ("id", "image_x", "image_y", "world_x", "world_y")
CORRESPONDENCE_GEO_COLUMNS = ("id", "image_x", "image_y", "lat", "lon")
HORIZON_COLUMNS = ("image_x", "image_y")
WORLD_POINT_COLUMNS = ("x1", "x2", "x3")
IMAGE_POINT_COLUMNS = ("y1", "y2")
SWEEP_COLUMNS = ("parameter", "value", "distance", "apparent_height", "status")
STUDY_COLUMNS = ("n", "repeat", "height", "tilt", "converged",
                 "height_err_mean", "height_err_std")
CSV_DELIMITER = ","
CSV_LINE_END = "\n"

# Point status labels
STATUS_OK = "ok"
STATUS_BEHIND = "behind"
STATUS_DEGENERATE = "degenerate"

# Raster
RASTER_FILL_VALUE = 0

# CLI exit codes
EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_DEGENERATE = 2
EXIT_NOT_CONVERGED = 3

# Logging
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Plot styling
GRAPH_COLORS = {
    "primary": "#3498db",
    "success": "#2ecc71",
    "warning": "#f39c12",
    "danger": "#e74c3c",
    "info": "#17a2b8"
}

APP_TITLE = "CamFit - camera geometry and extrinsic fitting"
