from anisotl.geometry.cubes import DyadicCube, cube_indices, cube_meets_region, cube_of_point, cubes_meeting_region
from anisotl.geometry.regions import Ball, Box, ConvexPolygon, Parallelotope, Region, UnionRegion, parse_region

__all__ = [
    "Ball", "Box", "ConvexPolygon", "DyadicCube", "Parallelotope", "Region", "UnionRegion",
    "cube_indices", "cube_meets_region", "cube_of_point", "cubes_meeting_region", "parse_region",
]
