"""Signed distance construction, closest points, curvatures and the
Jacobian weights of the implicit boundary integral quadrature.

Sign convention: distances are positive inside the solid.  The outward
normal of the solid is therefore ``-grad(d)``.

"""

import logging

import numba
import numpy as np

from . import exceptions


log = logging.getLogger(__name__)

#: Tolerance on ``| |grad d| - 1 |`` over the band after redistancing.
TOL_EIKONAL = 5e-2

_MAX_SWEEP_ROUNDS = 32


def redistance(phi):
    """Replace a level set function by the signed distance to its zero set.

    Points next to a sign change are initialized with the distance to the
    local linear interface through the zero crossings on their grid edges;
    these values stay fixed.  All other points are solved by fast sweeping
    of the eikonal equation with the first-order Godunov update.

    Return a new :class:`.grid.ScalarField` with the sign of **phi**.

    Raise :exc:`.exceptions.InterfaceVanishedError` if **phi** does not
    change sign.

    :param phi:
        :class:`.grid.ScalarField` with the level set function.

    """
    values = phi.values
    if not (np.any(values > 0) and np.any(values < 0)):
        raise exceptions.InterfaceVanishedError('interface vanished')
    h = phi.grid.spacing
    distance, fixed = _initial_front(values, h)
    if phi.grid.dim == 2:
        distance = distance[:, :, np.newaxis]
        fixed = fixed[:, :, np.newaxis]
    distance = np.ascontiguousarray(distance)
    rounds = _fast_sweep(
        distance, np.ascontiguousarray(fixed), h, _MAX_SWEEP_ROUNDS, 1e-9 * h)
    log.debug('fast sweeping converged after %d rounds', rounds)
    distance = distance.reshape(phi.grid.shape)
    signed = np.where(values > 0, distance, -distance)
    signed[values == 0] = 0.0
    return phi.with_values(signed)


def _initial_front(values, h):
    dim = values.ndim
    inverse_squares = np.zeros(values.shape)
    for axis in range(dim):
        nearest = np.full(values.shape, np.inf)
        lower = [slice(None)] * dim
        upper = [slice(None)] * dim
        lower[axis] = slice(None, -1)
        upper[axis] = slice(1, None)
        lower, upper = tuple(lower), tuple(upper)
        a = values[lower]
        b = values[upper]
        crossing = a * b < 0
        with np.errstate(divide='ignore', invalid='ignore'):
            theta = np.where(crossing, a / (a - b), np.inf)
        nearest[lower] = np.minimum(
            nearest[lower], np.where(crossing, theta * h, np.inf))
        nearest[upper] = np.minimum(
            nearest[upper], np.where(crossing, (1.0 - theta) * h, np.inf))
        cut = np.isfinite(nearest)
        inverse_squares[cut] += 1.0 / nearest[cut] ** 2
    fixed = inverse_squares > 0
    distance = np.full(values.shape, np.inf)
    distance[fixed] = 1.0 / np.sqrt(inverse_squares[fixed])
    zero = values == 0
    distance[zero] = 0.0
    return distance, fixed | zero


@numba.njit
def _godunov_update(a, b, c, h):
    if a > b:
        a, b = b, a
    if b > c:
        b, c = c, b
    if a > b:
        a, b = b, a
    x = a + h
    if x > b:
        x = 0.5 * (a + b + np.sqrt(2.0 * h * h - (a - b) * (a - b)))
        if x > c:
            s = a + b + c
            q = s * s - 3.0 * (a * a + b * b + c * c - h * h)
            x = (s + np.sqrt(max(q, 0.0))) / 3.0
    return x


@numba.njit
def _fast_sweep(u, fixed, h, max_rounds, tol):
    nx, ny, nz = u.shape
    sweeps = 8 if nz > 1 else 4
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        change = 0.0
        for s in range(sweeps):
            sx = 1 if (s & 1) == 0 else -1
            sy = 1 if (s & 2) == 0 else -1
            sz = 1 if (s & 4) == 0 else -1
            for ii in range(nx):
                i = ii if sx > 0 else nx - 1 - ii
                for jj in range(ny):
                    j = jj if sy > 0 else ny - 1 - jj
                    for kk in range(nz):
                        k = kk if sz > 0 else nz - 1 - kk
                        if fixed[i, j, k]:
                            continue
                        a = np.inf
                        if i > 0:
                            a = u[i - 1, j, k]
                        if i < nx - 1 and u[i + 1, j, k] < a:
                            a = u[i + 1, j, k]
                        b = np.inf
                        if j > 0:
                            b = u[i, j - 1, k]
                        if j < ny - 1 and u[i, j + 1, k] < b:
                            b = u[i, j + 1, k]
                        c = np.inf
                        if k > 0:
                            c = u[i, j, k - 1]
                        if k < nz - 1 and u[i, j, k + 1] < c:
                            c = u[i, j, k + 1]
                        new = _godunov_update(a, b, c, h)
                        if new < u[i, j, k]:
                            if u[i, j, k] - new > change:
                                change = u[i, j, k] - new
                            u[i, j, k] = new
        if change <= tol:
            break
    return rounds


def eikonal_defect(d, band):
    """Return ``max | |grad d| - 1 |`` over the band points.

    Gradients use second-order central differences.

    """
    gradient = _gradient(d.values, band.grid.unravel(band.indices),
                         d.grid.spacing)
    return float(np.max(np.abs(np.linalg.norm(gradient, axis=1) - 1.0)))


class DistanceBundle(object):

    """Signed distance with its geometry at the narrow band points.

    :param field:
        The signed distance :class:`.grid.ScalarField`.
    :param band:
        The :class:`.grid.NarrowBand` the per-point arrays refer to.
    :param gradient:
        ``(N, dim)`` gradient of ``d``.
    :param closest_points:
        ``(N, dim)`` projections ``x - d(x) grad d(x)``.
    :param curvatures:
        ``(N, dim - 1)`` principal curvatures of the interface at the
        projection, positive for a convex solid.

    """

    def __init__(self, field, band, gradient, closest_points, curvatures):
        self.field = field
        self.band = band
        self.gradient = gradient
        self.closest_points = closest_points
        self.curvatures = curvatures

    def __len__(self):
        return len(self.band)

    @property
    def grid(self):
        return self.field.grid

    @property
    def points(self):
        return self.band.points()

    @property
    def distance(self):
        return self.field.at(self.band.indices)

    @property
    def normals(self):
        """Unit outward normals of the solid, ``-grad d / |grad d|``."""
        norm = np.linalg.norm(self.gradient, axis=1)
        return -self.gradient / np.maximum(norm, 1e-12)[:, np.newaxis]

    @property
    def total_curvature(self):
        """Curvature in 2D, sum of principal curvatures in 3D."""
        return self.curvatures.sum(axis=1)


def closest_point_map(d, band):
    """Compute projections and interface curvatures for the band points.

    Curvatures of the level set through each band point come from central
    second differences of **d**; they are moved to the projection with
    ``kappa* = kappa / (1 + d kappa)`` for each principal curvature.

    Return a :class:`DistanceBundle`.

    Raise :exc:`.exceptions.BandExceedsReachError` when ``1 + d kappa`` is
    not positive at some band point.

    :param d:
        Signed distance :class:`.grid.ScalarField`.
    :param band:
        :class:`.grid.NarrowBand` built from **d**.

    """
    h = d.grid.spacing
    index = d.grid.unravel(band.indices)
    distance = d.at(band.indices)
    gradient = _gradient(d.values, index, h)
    hessian = _hessian(d.values, index, h)
    if d.grid.dim == 2:
        level_curvatures = _curvature_2d(gradient, hessian)[:, np.newaxis]
    else:
        level_curvatures = _principal_curvatures_3d(gradient, hessian)
    factor = 1.0 + distance[:, np.newaxis] * level_curvatures
    if np.any(factor <= 0):
        raise exceptions.BandExceedsReachError(
            'band exceeds reach: 1 + d*kappa <= 0 at {0} band points'.format(
                int(np.sum(np.any(factor <= 0, axis=1)))))
    curvatures = level_curvatures / factor
    closest = band.points() - distance[:, np.newaxis] * gradient
    return DistanceBundle(d, band, gradient, closest, curvatures)


def _shifted(values, index, offset):
    return values[tuple((index + offset).T)]


def _unit(dim, axis, sign=1):
    offset = np.zeros(dim, dtype=int)
    offset[axis] = sign
    return offset


def _gradient(values, index, h):
    dim = values.ndim
    columns = []
    for axis in range(dim):
        e = _unit(dim, axis)
        columns.append((_shifted(values, index, e) -
                        _shifted(values, index, -e)) / (2.0 * h))
    return np.stack(columns, axis=1)


def _hessian(values, index, h):
    dim = values.ndim
    centre = _shifted(values, index, np.zeros(dim, dtype=int))
    hessian = np.empty((len(index), dim, dim))
    for a in range(dim):
        ea = _unit(dim, a)
        hessian[:, a, a] = (_shifted(values, index, ea) - 2.0 * centre +
                            _shifted(values, index, -ea)) / h ** 2
        for b in range(a + 1, dim):
            eb = _unit(dim, b)
            mixed = (_shifted(values, index, ea + eb) -
                     _shifted(values, index, ea - eb) -
                     _shifted(values, index, eb - ea) +
                     _shifted(values, index, -ea - eb)) / (4.0 * h ** 2)
            hessian[:, a, b] = mixed
            hessian[:, b, a] = mixed
    return hessian


def _curvature_2d(g, H):
    gx, gy = g[:, 0], g[:, 1]
    norm = np.maximum(np.hypot(gx, gy), 1e-12)
    divergence = (H[:, 0, 0] * gy ** 2 - 2.0 * gx * gy * H[:, 0, 1] +
                  H[:, 1, 1] * gx ** 2) / norm ** 3
    return -divergence


def _principal_curvatures_3d(g, H):
    norm = np.maximum(np.linalg.norm(g, axis=1), 1e-12)
    trace = np.trace(H, axis1=1, axis2=2)
    gHg = np.einsum('ni,nij,nj->n', g, H, g)
    mean_sum = -(trace * norm ** 2 - gHg) / norm ** 3
    adjugate = np.empty_like(H)
    adjugate[:, 0, 0] = H[:, 1, 1] * H[:, 2, 2] - H[:, 1, 2] ** 2
    adjugate[:, 1, 1] = H[:, 0, 0] * H[:, 2, 2] - H[:, 0, 2] ** 2
    adjugate[:, 2, 2] = H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] ** 2
    adjugate[:, 0, 1] = H[:, 0, 2] * H[:, 1, 2] - H[:, 0, 1] * H[:, 2, 2]
    adjugate[:, 0, 2] = H[:, 0, 1] * H[:, 1, 2] - H[:, 0, 2] * H[:, 1, 1]
    adjugate[:, 1, 2] = H[:, 0, 1] * H[:, 0, 2] - H[:, 0, 0] * H[:, 1, 2]
    adjugate[:, 1, 0] = adjugate[:, 0, 1]
    adjugate[:, 2, 0] = adjugate[:, 0, 2]
    adjugate[:, 2, 1] = adjugate[:, 1, 2]
    gaussian = np.einsum('ni,nij,nj->n', g, adjugate, g) / norm ** 4
    spread = np.sqrt(np.maximum(0.25 * mean_sum ** 2 - gaussian, 0.0))
    return np.stack([0.5 * mean_sum + spread, 0.5 * mean_sum - spread],
                    axis=1)


def cosine_kernel(t, eps):
    """Unit-mass averaging kernel supported in ``[-eps, eps]``.

    ``(1 + cos(pi t / eps)) / (2 eps)`` inside the support, zero outside.

    """
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < eps
    return np.where(inside, (1.0 + np.cos(np.pi * t / eps)) / (2.0 * eps),
                    0.0)


class JacobianWeights(object):

    """Quadrature weights ``J * delta_eps(d) * h**m`` per band point.

    :param jacobian:
        Ratio of the surface measure of the level set through the point to
        that of the interface.
    :param delta:
        Averaging kernel values.
    :param cell_volume:
        ``h**m``.

    """

    def __init__(self, jacobian, delta, cell_volume):
        self.jacobian = jacobian
        self.delta = delta
        self.weights = jacobian * delta * cell_volume

    def __len__(self):
        return len(self.weights)


def jacobian_and_kernel_weights(bundle, eps, kernel=cosine_kernel):
    """Return the :class:`JacobianWeights` of **bundle**.

    ``J = prod(1 - d kappa_i*)`` over the principal curvatures at the
    projection, so ``J = 1`` on the interface and ``J < 1`` inside a convex
    solid.

    Raise :exc:`.exceptions.BandExceedsReachError` when ``J <= 0`` at some
    band point.

    :param bundle:
        :class:`DistanceBundle` of the band.
    :param eps:
        Band half-width used by the averaging kernel.
    :param kernel:
        Averaging kernel ``kernel(t, eps)``, defaults to
        :func:`cosine_kernel`.

    """
    distance = bundle.distance
    jacobian = np.prod(1.0 - distance[:, np.newaxis] * bundle.curvatures,
                       axis=1)
    if np.any(jacobian <= 0):
        raise exceptions.BandExceedsReachError(
            'band exceeds reach: non-positive Jacobian at {0} points'.format(
                int(np.sum(jacobian <= 0))))
    delta = kernel(distance, eps)
    return JacobianWeights(jacobian, delta, bundle.grid.cell_volume)


def surface_integral(bundle, weights, values=None):
    """Integrate per-point **values** over the interface.

    With no **values** return the interface length (2D) or area (3D).

    """
    if values is None:
        return float(np.sum(weights.weights))
    return float(np.dot(weights.weights, values))

