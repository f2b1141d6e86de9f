"""Parallel volumes of compact sets: constructions with prescribed
non-differentiability radii and grid-based checks of their behaviour."""
from . import analysis, constructions, engine, fractal_strings, geometry
from .analysis import (
    characterize_differentiability,
    detect_nondiff,
    detect_nondiff_1d_exact,
    flat_distance,
    is_critical,
    kneser_check,
    one_sided_derivatives,
    scan_critical_values,
    stacho_check,
    weak_convergence_report,
)
from .constructions import (
    GammaPolicy,
    construct_boxes_dimd,
    construct_dim1,
    construct_dim2_eps,
    construct_dim2_full,
    decompose_tail,
    pack_rectangles,
    predicted_nondiff_1d,
)
from .engine import (
    distance_field,
    exact_volume_oracle,
    extract_level_set,
    local_measure,
    radii_grid,
    volume_function,
)
from .errors import ParvolError
from .fractal_strings import TargetRadii, cantor_gallery, check_dim2_conditions, gap_sum, integral_condition
from .geometry import Disk, PointSet, Rect, Set1D, Stadium, from_json, rect_boundary, to_json, two_points

__version__ = "0.1.0"
