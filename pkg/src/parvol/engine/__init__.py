"""Parallel volumes, level sets and projections on grids and by closed forms."""
from .grid import DistanceField, Grid, distance_field, distance_transform, grid_for, rasterize_membership
from .level import (SurfaceCloud, attach_projections, complement, extract_level_set, half_plane,
                    local_measure, lower_directions, upper_directions)
from .projection import Classification, ProjectionRecord, classify_points, hull_distance, project
from .volume import (ORACLE_KINDS, VolumeSamples, exact_volume_oracle, kinks_1d_exact, radii_grid,
                     volume_1d_exact, volume_function)

__all__ = [
    "Classification", "DistanceField", "Grid", "ORACLE_KINDS", "ProjectionRecord", "SurfaceCloud",
    "VolumeSamples", "attach_projections", "classify_points", "complement", "distance_field",
    "distance_transform", "exact_volume_oracle", "extract_level_set", "grid_for", "half_plane",
    "hull_distance", "kinks_1d_exact", "local_measure", "lower_directions", "project", "radii_grid",
    "rasterize_membership", "upper_directions", "volume_1d_exact", "volume_function",
]
