"""Tests for :mod:`msibim.levelset`."""

import numpy as np
import pytest
import scipy.integrate

from msibim import exceptions
from msibim import grid as gridmod
from msibim import levelset
from msibim import shapes
from . import utils


def _radius(*coordinates):
    return np.sqrt(sum(c ** 2 for c in coordinates))


def _unit_circle_inside_positive(h):
    grid = utils.box_grid(h)
    return gridmod.ScalarField.from_function(
        grid, lambda x, y: 1.0 - x ** 2 - y ** 2)


class TestRedistance(object):

    """Tests for :func:`msibim.levelset.redistance`."""

    def test_matches_circle_distance(self):
        h = 4.0 / 128
        d = levelset.redistance(_unit_circle_inside_positive(h))
        exact = 1.0 - _radius(*d.grid.coordinates())
        near = np.abs(exact) < 6 * h
        assert np.max(np.abs(d.values - exact)[near]) <= h

    def test_keeps_zero_set(self):
        h = 4.0 / 128
        d = levelset.redistance(_unit_circle_inside_positive(h))
        exact = 1.0 - _radius(*d.grid.coordinates())
        front = np.abs(exact) < h
        assert np.max(np.abs(d.values - exact)[front]) <= h ** 2

    def test_keeps_sign(self):
        phi = _unit_circle_inside_positive(4.0 / 64)
        d = levelset.redistance(phi)
        assert np.array_equal(d.values > 0, phi.values > 0)

    def test_eikonal_defect(self):
        h = 4.0 / 128
        d = levelset.redistance(_unit_circle_inside_positive(h))
        band = gridmod.build_band(d, 6 * h)
        assert levelset.eikonal_defect(d, band) < levelset.TOL_EIKONAL

    def test_is_nearly_idempotent(self):
        h = 4.0 / 128
        once = levelset.redistance(_unit_circle_inside_positive(h))
        twice = levelset.redistance(once)
        band = gridmod.build_band(once, 6 * h)
        assert np.max(np.abs(once.at(band.indices) -
                             twice.at(band.indices))) <= 0.25 * h

    def test_sphere_distance_is_kept(self):
        h = 4.0 / 64
        exact = utils.exact_distance(utils.box_grid(h, dim=3),
                                     shapes.Sphere([0, 0, 0], 0.8))
        d = levelset.redistance(exact)
        band = gridmod.build_band(exact, 6 * h)
        assert np.max(np.abs(d.at(band.indices) -
                             exact.at(band.indices))) <= levelset.TOL_EIKONAL

    def test_scaled_distance(self):
        h = 4.0 / 128
        exact = utils.exact_distance(utils.box_grid(h),
                                     shapes.Circle([0, 0], 1.0))
        doubled = levelset.redistance(exact.with_values(2.0 * exact.values))
        front = np.abs(exact.values) < h
        assert np.max(np.abs(doubled.values - exact.values)[front]) <= h ** 2
        band = np.abs(exact.values) < 6 * h
        assert np.max(np.abs(doubled.values - exact.values)[band]) <= h
        assert np.array_equal(doubled.values,
                              levelset.redistance(exact).values)

    def test_without_sign_change(self):
        field = gridmod.ScalarField(utils.box_grid(0.5), -np.ones(81))
        with pytest.raises(exceptions.InterfaceVanishedError):
            levelset.redistance(field)


class TestClosestPointMap(object):

    """Tests for :func:`msibim.levelset.closest_point_map`."""

    def _single_point(self, grid, func, point):
        d = gridmod.ScalarField.from_function(grid, func)
        band = gridmod.NarrowBand(grid, 4 * grid.spacing,
                                  [utils.flat_index(grid, point)])
        return levelset.closest_point_map(d, band)

    def test_projection_onto_circle(self):
        h = 4.0 / 128
        d = utils.exact_distance(utils.box_grid(h),
                                 shapes.Circle([0, 0], 1.0))
        bundle = levelset.closest_point_map(d, gridmod.build_band(d, 6 * h))
        points = bundle.points
        expected = points / np.linalg.norm(points, axis=1)[:, np.newaxis]
        assert np.max(np.abs(bundle.closest_points - expected)) <= h ** 2

    def test_curvature_is_transported_2d(self):
        grid = utils.box_grid(0.0625)
        bundle = self._single_point(grid, lambda x, y: 1 - np.hypot(x, y),
                                    [1.5, 0.0])
        assert np.allclose(bundle.closest_points, [[1.0, 0.0]], atol=1e-6)
        assert abs(bundle.curvatures[0, 0] - 1.0) < 1e-2

    def test_curvature_is_transported_3d(self):
        grid = utils.box_grid(0.1, dim=3)
        bundle = self._single_point(grid, lambda x, y, z: 1 - _radius(x, y, z),
                                    [0.0, 0.0, 1.2])
        assert np.allclose(bundle.closest_points, [[0.0, 0.0, 1.0]],
                           atol=1e-6)
        assert np.allclose(bundle.curvatures, [[1.0, 1.0]], atol=2e-2)
        assert abs(bundle.total_curvature[0] - 2.0) < 2e-2

    def test_normals_point_out_of_the_solid(self):
        grid = utils.box_grid(0.0625)
        bundle = self._single_point(grid, lambda x, y: 1 - np.hypot(x, y),
                                    [0.0, -1.25])
        assert np.allclose(bundle.normals, [[0.0, -1.0]], atol=1e-6)

    def test_band_exceeds_reach(self):
        grid = utils.box_grid(0.125, half=4.0)
        with pytest.raises(exceptions.BandExceedsReachError):
            self._single_point(grid, lambda x, y: 3 * (1 - np.hypot(x, y)),
                               [3.0, 0.0])


class TestWeights(object):

    """Tests for :func:`msibim.levelset.jacobian_and_kernel_weights`."""

    def test_kernel_has_unit_mass(self):
        mass, __ = scipy.integrate.quad(
            lambda t: float(levelset.cosine_kernel(t, 0.3)), -0.3, 0.3)
        assert abs(mass - 1.0) < 1e-10

    def test_kernel_sums_to_one_on_a_lattice(self):
        h = 0.01
        eps = 6 * h
        for shift in (0.0, 0.3 * h, 0.77 * h):
            t = np.arange(-10, 11) * h + shift
            assert abs(np.sum(levelset.cosine_kernel(t, eps)) * h - 1) < 1e-12

    def test_kernel_support(self):
        values = levelset.cosine_kernel([-1.0, -0.5, 0.5, 2.0], 0.5)
        assert np.all(values == 0.0)

    def test_jacobian_inside_circle(self):
        grid = utils.box_grid(0.05)
        d = gridmod.ScalarField.from_function(
            grid, lambda x, y: 1 - np.hypot(x, y))
        band = gridmod.NarrowBand(grid, 0.3, [utils.flat_index(grid,
                                                               [0.9, 0.0])])
        bundle = levelset.closest_point_map(d, band)
        weights = levelset.jacobian_and_kernel_weights(bundle, 0.3)
        assert abs(weights.jacobian[0] - 0.9) < 1e-3

    def test_non_positive_jacobian(self):
        grid = utils.box_grid(0.05)
        d = gridmod.ScalarField.from_function(
            grid, lambda x, y: 1 - np.hypot(x, y))
        band = gridmod.NarrowBand(grid, 0.3, [utils.flat_index(grid,
                                                               [0.9, 0.0])])
        bundle = levelset.DistanceBundle(d, band, np.array([[-1.0, 0.0]]),
                                         np.array([[1.0, 0.0]]),
                                         np.array([[20.0]]))
        with pytest.raises(exceptions.BandExceedsReachError):
            levelset.jacobian_and_kernel_weights(bundle, 0.3)

    def test_circle_length(self):
        h = 4.0 / 512
        d = utils.exact_distance(utils.box_grid(h),
                                 shapes.Circle([0, 0], 1.0))
        band = gridmod.build_band(d, 6 * h)
        bundle = levelset.closest_point_map(d, band)
        weights = levelset.jacobian_and_kernel_weights(bundle, 6 * h)
        length = levelset.surface_integral(bundle, weights)
        assert abs(length - 2 * np.pi) < 1e-3

    def test_sphere_area(self):
        h = 4.0 / 128
        d = utils.exact_distance(utils.box_grid(h, dim=3),
                                 shapes.Sphere([0, 0, 0], 1.0))
        band = gridmod.build_band(d, 6 * h)
        bundle = levelset.closest_point_map(d, band)
        weights = levelset.jacobian_and_kernel_weights(bundle, 6 * h)
        area = levelset.surface_integral(bundle, weights)
        assert abs(area - 4 * np.pi) < 5e-3

    def test_integral_of_a_function(self):
        h = 4.0 / 256
        d = utils.exact_distance(utils.box_grid(h),
                                 shapes.Circle([0, 0], 1.0))
        bundle = levelset.closest_point_map(d, gridmod.build_band(d, 6 * h))
        weights = levelset.jacobian_and_kernel_weights(bundle, 6 * h)
        x = bundle.closest_points[:, 0]
        assert abs(levelset.surface_integral(bundle, weights, x ** 2) -
                   np.pi) < 1e-3
