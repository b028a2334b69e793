"""Tests for :mod:`msibim.shapes`."""

import numpy as np
import pytest

from msibim import grid as gridmod
from msibim import shapes
from . import utils


class TestShapes(object):

    """Tests for the :class:`msibim.shapes.Shape` subclasses."""

    def test_circle_is_a_distance(self):
        circle = shapes.Circle([1.0, 0.0], 0.5)
        assert circle(1.0, 0.0) == 0.5
        assert circle(2.0, 0.0) == -0.5
        assert circle.dim == 2

    def test_sphere(self):
        sphere = shapes.Sphere([0, 0, 0], 1.0)
        assert sphere(0.0, 0.0, 3.0) == -2.0
        assert sphere.kind == 'sphere'
        assert sphere.dim == 3

    def test_ellipse_zero_set(self):
        ellipse = shapes.Ellipse([0, 0], 2.0, 1.0)
        assert ellipse(2.0, 0.0) == pytest.approx(0.0)
        assert ellipse(0.0, 1.0) == pytest.approx(0.0)
        assert ellipse(0.0, 0.0) > 0
        assert ellipse(0.0, 1.5) < 0
        assert ellipse.area() == pytest.approx(2 * np.pi)

    def test_rotated_ellipse(self):
        ellipse = shapes.Ellipse([0, 0], 2.0, 1.0, angle=np.pi / 2)
        assert ellipse(0.0, 2.0) == pytest.approx(0.0)

    def test_ellipsoid(self):
        ellipsoid = shapes.Ellipsoid([0, 0, 0], 1.0, 2.0, 3.0)
        assert ellipsoid(0.0, 0.0, 3.0) == pytest.approx(0.0)
        assert ellipsoid(0.0, 2.5, 0.0) < 0

    def test_tube(self):
        tube = shapes.Tube([-1.0, 0.0], [1.0, 0.0], 0.2)
        assert tube(0.0, 0.5) == pytest.approx(-0.3)
        assert tube(1.5, 0.0) == pytest.approx(-0.3)
        lower, upper = tube.bounds()
        assert np.allclose(lower, [-1.2, -0.2])
        assert np.allclose(upper, [1.2, 0.2])

    def test_star(self):
        star = shapes.Star([0, 0], 1.0, 0.1, mode=4)
        assert star(1.1, 0.0) == pytest.approx(0.0)
        assert star(0.0, 1.1) == pytest.approx(0.0)
        diagonal = 0.9 / np.sqrt(2)
        assert star(diagonal, diagonal) == pytest.approx(0.0)

    def test_star_in_three_dimensions(self):
        star = shapes.Star([0, 0, 0], 1.0, 0.1)
        assert star(1.04, 0.0, 0.0) == pytest.approx(0.0)

    @pytest.mark.parametrize('factory', [
        lambda: shapes.Circle([0, 0], 0.0),
        lambda: shapes.Ellipse([0, 0], 1.0, -1.0),
        lambda: shapes.Tube([0, 0], [1, 0, 0], 0.1),
        lambda: shapes.Star([0, 0], 1.0, 0.5),
        lambda: shapes.Union([]),
    ])
    def test_invalid(self, factory):
        with pytest.raises(ValueError):
            factory()

    def test_union(self):
        union = shapes.Union([shapes.Circle([-1, 0], 0.5),
                              shapes.Circle([1, 0], 0.5)])
        assert union(-1.0, 0.0) == 0.5
        assert union(1.0, 0.0) == 0.5
        assert union(0.0, 0.0) == -0.5
        lower, upper = union.bounds()
        assert np.allclose(lower, [-1.5, -0.5])
        assert np.allclose(upper, [1.5, 0.5])


class TestFieldFile(object):

    """Tests for :class:`msibim.shapes.FieldFile`."""

    def test_reads_values(self, tmp_path):
        grid = utils.box_grid(0.25)
        field = utils.exact_distance(grid, shapes.Circle([0, 0], 1.0))
        path = str(tmp_path / 'seed.msi')
        gridmod.write_snapshot(path, field)
        shape = shapes.FieldFile(path)
        assert np.array_equal(shape.evaluate(grid), field.values)
        lower, upper = shape.bounds()
        assert np.allclose(lower, [-0.75, -0.75])
        assert np.allclose(upper, [0.75, 0.75])

    def test_grid_mismatch(self, tmp_path):
        field = utils.exact_distance(utils.box_grid(0.25),
                                     shapes.Circle([0, 0], 1.0))
        path = str(tmp_path / 'seed.msi')
        gridmod.write_snapshot(path, field)
        with pytest.raises(ValueError):
            shapes.FieldFile(path).evaluate(utils.box_grid(0.125))


def test_initial_distance():
    h = 4.0 / 128
    grid = utils.box_grid(h)
    d = shapes.initial_distance(grid, shapes.Ellipse([0, 0], 1.2, 0.6))
    assert utils.crossing_radius(d, 0) == pytest.approx(1.2, abs=h ** 2)
    assert utils.crossing_radius(d, 1) == pytest.approx(0.6, abs=h ** 2)
    assert d.values[64, 64] == pytest.approx(0.6, abs=h)
