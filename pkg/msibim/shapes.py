"""Initial interface geometries.

Every shape is a level set function, positive inside the solid, whose zero
set is the shape boundary.  Circles, spheres and tubes return the exact
signed distance; the other shapes only have the right zero set and are
turned into distances by :func:`initial_distance`.

"""

import numpy as np

from . import grid as gridmod
from . import levelset


class Shape(object):

    """Base class of the initial shapes."""

    #: Name used by the ``[shapes]`` configuration section.
    kind = None

    def __call__(self, *coordinates):
        raise NotImplementedError

    def evaluate(self, grid):
        """Return the level set values at every point of **grid**."""
        return self(*grid.coordinates())

    def bounds(self):
        """Return the ``(lower, upper)`` corners of a bounding box."""
        raise NotImplementedError

    @property
    def dim(self):
        return len(self.bounds()[0])


def _stack(coordinates):
    return np.stack([np.asarray(c, dtype=float) for c in coordinates],
                    axis=-1)


class Circle(Shape):

    """Disk or ball of **radius** around **center**."""

    kind = 'circle'

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError('radius must be positive')

    def __call__(self, *coordinates):
        offset = _stack(coordinates) - self.center
        return self.radius - np.linalg.norm(offset, axis=-1)

    def bounds(self):
        return self.center - self.radius, self.center + self.radius


class Sphere(Circle):

    kind = 'sphere'


class Ellipse(Shape):

    """Ellipse with semi-axes **a** and **b**, rotated by **angle** radians.
    """

    kind = 'ellipse'

    def __init__(self, center, a, b, angle=0.0):
        self.center = np.asarray(center, dtype=float)
        self.axes = np.array([a, b], dtype=float)
        self.angle = float(angle)
        if np.any(self.axes <= 0):
            raise ValueError('semi-axes must be positive')

    def __call__(self, x, y):
        dx = np.asarray(x) - self.center[0]
        dy = np.asarray(y) - self.center[1]
        cos, sin = np.cos(self.angle), np.sin(self.angle)
        u = (cos * dx + sin * dy) / self.axes[0]
        v = (-sin * dx + cos * dy) / self.axes[1]
        return self.axes.min() * (1.0 - np.hypot(u, v))

    def bounds(self):
        reach = self.axes.max()
        return self.center - reach, self.center + reach

    def area(self):
        return float(np.pi * self.axes.prod())


class Ellipsoid(Shape):

    """Axis-aligned ellipsoid with semi-axes **a**, **b** and **c**."""

    kind = 'ellipsoid'

    def __init__(self, center, a, b, c):
        self.center = np.asarray(center, dtype=float)
        self.axes = np.array([a, b, c], dtype=float)
        if np.any(self.axes <= 0):
            raise ValueError('semi-axes must be positive')

    def __call__(self, x, y, z):
        scaled = (_stack((x, y, z)) - self.center) / self.axes
        return self.axes.min() * (1.0 - np.linalg.norm(scaled, axis=-1))

    def bounds(self):
        return self.center - self.axes, self.center + self.axes


class Tube(Shape):

    """Points within **radius** of the segment from **start** to **end**."""

    kind = 'tube'

    def __init__(self, start, end, radius):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError('radius must be positive')
        if self.start.shape != self.end.shape:
            raise ValueError('tube ends must have the same dimension')

    def __call__(self, *coordinates):
        points = _stack(coordinates)
        axis = self.end - self.start
        length2 = float(np.dot(axis, axis))
        if length2 == 0:
            t = np.zeros(points.shape[:-1])
        else:
            t = np.clip(np.dot(points - self.start, axis) / length2, 0, 1)
        nearest = self.start + t[..., np.newaxis] * axis
        return self.radius - np.linalg.norm(points - nearest, axis=-1)

    def bounds(self):
        lower = np.minimum(self.start, self.end) - self.radius
        upper = np.maximum(self.start, self.end) + self.radius
        return lower, upper


class Star(Shape):

    """Perturbed circle or sphere.

    In 2D the radius is ``r (1 + amplitude cos(mode theta))``; in 3D it is
    ``r (1 + amplitude (x**4 + y**4 + z**4 - 3/5))`` on the unit direction,
    the lowest cubic-symmetric perturbation.

    """

    kind = 'star'

    def __init__(self, center, radius, amplitude, mode=4):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        self.mode = int(mode)
        if self.radius <= 0:
            raise ValueError('radius must be positive')
        if abs(self.amplitude) >= 0.5:
            raise ValueError('amplitude must be below 0.5')

    def __call__(self, *coordinates):
        offset = _stack(coordinates) - self.center
        r = np.linalg.norm(offset, axis=-1)
        return self.boundary_radius(offset) - r

    def boundary_radius(self, offset):
        """Radius of the boundary in the direction of **offset**."""
        offset = np.asarray(offset, dtype=float)
        r = np.maximum(np.linalg.norm(offset, axis=-1), 1e-300)
        if offset.shape[-1] == 2:
            theta = np.arctan2(offset[..., 1], offset[..., 0])
            shape = np.cos(self.mode * theta)
        else:
            unit = offset / r[..., np.newaxis]
            shape = np.sum(unit ** 4, axis=-1) - 0.6
        return self.radius * (1.0 + self.amplitude * shape)

    def bounds(self):
        reach = self.radius * (1.0 + abs(self.amplitude))
        return self.center - reach, self.center + reach


class FieldFile(Shape):

    """Level set values read from a grid snapshot file."""

    kind = 'file'

    def __init__(self, path):
        self.path = path
        self.field, __, __ = gridmod.read_snapshot(path)

    def evaluate(self, grid):
        if self.field.grid != grid:
            raise ValueError('{0} holds a field on {1!r}, not on {2!r}'.format(
                self.path, self.field.grid, grid))
        return np.array(self.field.values)

    def bounds(self):
        positive = self.field.values > 0
        if not np.any(positive):
            return self.field.grid.origin, self.field.grid.origin
        points = self.field.grid.points(np.flatnonzero(positive))
        return points.min(axis=0), points.max(axis=0)


class Union(Shape):

    """Solid covered by any of **shapes**."""

    kind = 'union'

    def __init__(self, shapes):
        self.shapes = list(shapes)
        if not self.shapes:
            raise ValueError('a union needs at least one shape')

    def __call__(self, *coordinates):
        return np.max([shape(*coordinates) for shape in self.shapes], axis=0)

    def evaluate(self, grid):
        return np.max([shape.evaluate(grid) for shape in self.shapes], axis=0)

    def bounds(self):
        corners = [shape.bounds() for shape in self.shapes]
        return (np.min([lower for lower, __ in corners], axis=0),
                np.max([upper for __, upper in corners], axis=0))


def initial_distance(grid, shapes):
    """Signed distance on **grid** to the union of **shapes**."""
    if isinstance(shapes, Shape):
        shapes = [shapes]
    phi = gridmod.ScalarField(grid, Union(shapes).evaluate(grid))
    return levelset.redistance(phi)
