import tempfile

import numpy as np
import scipy.ndimage

from msibim import grid as gridmod
from msibim import shapes


CONFIG = b"""
[run]
dim = 2
box = -3 3 -3 3
h = 0.125
eps_ratio = 4
final_time = 1
max_steps = 2

[shapes]
disk = circle 0 0 1
"""


def _make_tmp_config_file(content=None):
    if content is None:
        content = CONFIG
    tmpfile = tempfile.NamedTemporaryFile(suffix='.ini')
    tmpfile.write(content)
    tmpfile.seek(0)
    return tmpfile


def box_grid(h, dim=2, half=2.0):
    """Grid on ``[-half, half]**dim``."""
    return gridmod.Grid.from_box([-half] * dim, [half] * dim, h)


def exact_distance(grid, *parts):
    """Sample the union of exact-distance shapes without redistancing."""
    return gridmod.ScalarField(grid, shapes.Union(parts).evaluate(grid))


def annulus_distance(grid, inner, outer):
    """Exact signed distance of the solid ring ``inner < r < outer``."""
    def ring(*coordinates):
        r = np.sqrt(sum(c ** 2 for c in coordinates))
        return np.minimum(r - inner, outer - r)
    return gridmod.ScalarField.from_function(grid, ring)


def flat_index(grid, point):
    """Flat index of the grid point nearest to **point**."""
    index = grid.nearest_indices(np.array([point]))[0]
    return int(np.ravel_multi_index(tuple(index), grid.extents))


def crossing_radius(field, direction=0, sign=1):
    """Radius where the field changes sign along a half axis through the
    origin, by linear interpolation."""
    grid = field.grid
    centre = grid.nearest_indices(np.zeros((1, grid.dim)))[0]
    index = [int(c) for c in centre]
    index[direction] = slice(None)
    line = field.values[tuple(index)]
    coordinates = grid.origin[direction] + grid.spacing * np.arange(
        len(line))
    if sign < 0:
        line, coordinates = line[::-1], coordinates[::-1]
    start = int(centre[direction])
    if sign < 0:
        start = len(line) - 1 - start
    for k in range(start, len(line) - 1):
        a, b = line[k], line[k + 1]
        if a > 0 >= b:
            x = coordinates[k] + (coordinates[k + 1] - coordinates[k]) * (
                a / (a - b))
            return abs(x)
    raise AssertionError('no sign change along the axis')


def ray_radius(field, center, direction, length=2.0):
    """Distance from **center** to the first sign change of the field along
    **direction**, sampling by multilinear interpolation."""
    grid = field.grid
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    s = np.arange(0.0, length, grid.spacing / 4)
    points = np.asarray(center, dtype=float) + s[:, np.newaxis] * direction
    coordinates = ((points - grid.origin) / grid.spacing).T
    values = scipy.ndimage.map_coordinates(field.values, coordinates,
                                           order=1)
    outside = np.flatnonzero(values <= 0)
    if not len(outside) or outside[0] == 0:
        raise AssertionError('no sign change along the ray')
    k = outside[0]
    a, b = values[k - 1], values[k]
    return s[k - 1] + (s[k] - s[k - 1]) * a / (a - b)
