"""Implicit boundary integral systems for Laplace's equation.

Every connected component of the complement of the interface gets its own
Dirichlet problem, written as a double layer potential

    u(x) = int K(x, y) beta(y) dS(y) + sum_i A_i Phi(x - z_i)

with ``K = dPhi/dn_y`` and the normal pointing out of the component (out
of the solid for the unbounded component).  Surface integrals are turned
into sums over the narrow band with the weights of
:func:`msibim.levelset.jacobian_and_kernel_weights`, the kernel being
evaluated at the projections ``P(x_k)``.

With these conventions the double layer of ``beta = 1`` equals ``1``
inside the bounded side, ``0`` outside and ``1/2`` on the interface.

"""

import logging
import math

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import exceptions


log = logging.getLogger(__name__)

INTERIOR = 'interior'
EXTERIOR_BOUNDED_2D = 'exterior_bounded_2d'
EXTERIOR_DECAY_3D = 'exterior_decay_3d'
EXTERIOR_FARFIELD_3D = 'exterior_farfield_3d'
KINDS = (INTERIOR, EXTERIOR_BOUNDED_2D, EXTERIOR_DECAY_3D,
         EXTERIOR_FARFIELD_3D)

SOLVER_TOL = 1e-8
DENSE_LIMIT = 4000
GMRES_RESTART = 100
GMRES_MAX_CYCLES = 10

_BLOCK_SIZE = 128


def _sphere_measure(dim):
    return 2.0 * math.pi if dim == 2 else 4.0 * math.pi


def fundamental_solution(x, y):
    """``ln r / (2 pi)`` in 2D, ``-1 / (4 pi r)`` in 3D, ``r = |x - y|``.

    Broadcasts over leading axes; the last axis holds coordinates.

    """
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(diff, axis=-1)
    if diff.shape[-1] == 2:
        return np.log(r) / (2.0 * math.pi)
    return -1.0 / (4.0 * math.pi * r)


def fundamental_gradient(x, y):
    """Gradient of :func:`fundamental_solution` with respect to **x**."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    dim = diff.shape[-1]
    r2 = np.sum(diff ** 2, axis=-1)
    scale = _sphere_measure(dim) * r2 ** (dim / 2.0)
    return diff / scale[..., np.newaxis]


def double_layer_kernel(x, y, n_y, curvature=None, near=0.0):
    """``dPhi(x, y)/dn_y = ((y - x) . n_y) / (c |x - y|**m)``.

    ``c`` is ``2 pi`` in 2D and ``4 pi`` in 3D.  Where ``x == y``, or
    ``|x - y| < near`` when **near** is given, the 2D
    kernel takes its limit along a smooth curve, ``curvature / (4 pi)``
    with the curvature signed positive when the curve bends away from
    ``n_y``; the 3D kernel is set to zero there.

    """
    diff = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    n_y = np.asarray(n_y, dtype=float)
    dim = diff.shape[-1]
    r2 = np.sum(diff ** 2, axis=-1)
    numer = np.sum(diff * n_y, axis=-1)
    coincident = r2 < near ** 2 if near > 0 else r2 == 0
    with np.errstate(divide='ignore', invalid='ignore'):
        kernel = numer / (_sphere_measure(dim) * r2 ** (dim / 2.0))
    if np.any(coincident):
        if dim == 2 and curvature is not None:
            limit = np.asarray(curvature, dtype=float) / (4.0 * math.pi)
        else:
            limit = 0.0
        kernel = np.where(coincident, limit, kernel)
    return kernel


def double_layer_gradient(x, y, n_y):
    """Gradient of :func:`double_layer_kernel` with respect to **x**."""
    diff = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    n_y = np.asarray(n_y, dtype=float)
    dim = diff.shape[-1]
    r2 = np.sum(diff ** 2, axis=-1)[..., np.newaxis]
    numer = np.sum(diff * n_y, axis=-1)[..., np.newaxis]
    scale = _sphere_measure(dim) * r2 ** (dim / 2.0)
    return (dim * numer * diff / r2 - n_y) / scale


class BieProblem(object):

    """Dirichlet problem of one component, discretized on its band points.

    :param kind:
        One of :data:`KINDS`.
    :param points:
        ``(N, dim)`` projections ``P(x_k)`` of the band points.
    :param normals:
        ``(N, dim)`` unit normals at the projections, pointing out of the
        component (out of the solid for exterior kinds).
    :param curvature:
        ``(N,)`` interface curvature, positive where the interface bends
        away from **normals**; used by the 2D diagonal.
    :param weights:
        ``(N,)`` quadrature weights ``J * delta_eps * h**m``.
    :param data:
        ``(N,)`` Dirichlet values at the projections.
    :param spacing:
        Grid spacing, sets the near-diagonal radius ``h / 2``.
    :param anchors:
        ``(L, dim)`` source points, one per hole.
    :param piece_ids:
        ``(N,)`` index of the hole whose boundary the point lies on, or
        ``-1`` for the outer boundary piece.
    :param far_field:
        Value of ``u`` at infinity, exterior 3D kinds only.
    :param label:
        Label of the component in the :class:`.topology.TopologyReport`.
    :param positions:
        Positions of the points in the band arrays they were taken from.

    """

    def __init__(self, kind, points, normals, curvature, weights, data,
                 spacing, anchors=None, piece_ids=None, far_field=0.0,
                 label=None, positions=None):
        self.kind = kind
        self.points = np.asarray(points, dtype=float)
        self.normals = np.asarray(normals, dtype=float)
        self.curvature = np.asarray(curvature, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.data = np.asarray(data, dtype=float)
        self.spacing = float(spacing)
        size, dim = self.points.shape
        if anchors is None:
            anchors = np.zeros((0, dim))
        self.anchors = np.asarray(anchors, dtype=float).reshape(-1, dim)
        if piece_ids is None:
            piece_ids = np.full(size, -1, dtype=int)
        self.piece_ids = np.asarray(piece_ids, dtype=int)
        self.far_field = float(far_field)
        self.label = label
        self.positions = positions
        self._validate()

    def _validate(self):
        if self.kind not in KINDS:
            raise ValueError('Unknown problem kind: {0!r}'.format(self.kind))
        if self.dim == 2 and self.kind in (EXTERIOR_DECAY_3D,
                                           EXTERIOR_FARFIELD_3D):
            raise ValueError('{0} needs a 3D problem'.format(self.kind))
        if self.dim == 3 and self.kind == EXTERIOR_BOUNDED_2D:
            raise ValueError('{0} needs a 2D problem'.format(self.kind))
        if self.far_field and self.kind != EXTERIOR_FARFIELD_3D:
            raise ValueError('Only {0} problems take a far-field value'.format(
                EXTERIOR_FARFIELD_3D))
        if np.any(self.weights < 0):
            raise ValueError('Quadrature weights must be non-negative.')
        if self.exterior and not len(self.anchors):
            raise ValueError('Exterior problems need at least one anchor.')
        if len(self.anchors):
            gap = np.min(np.linalg.norm(
                self.points[:, np.newaxis] - self.anchors[np.newaxis],
                axis=-1))
            if gap < 2 * self.spacing:
                log.warning('anchor within %.3g of the interface, less than '
                            'two grid spacings', gap)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def size(self):
        return len(self.points)

    @property
    def holes(self):
        return len(self.anchors)

    @property
    def exterior(self):
        return self.kind != INTERIOR

    @property
    def jump(self):
        """The ``lambda`` coefficient of the boundary limit."""
        return -0.5 if self.exterior else 0.5

    @property
    def side(self):
        """``+1`` when the component lies along :attr:`normals`."""
        return 1.0 if self.exterior else -1.0

    def piece_weights(self, hole):
        """Quadrature weights restricted to the boundary of **hole**."""
        return np.where(self.piece_ids == hole, self.weights, 0.0)


def problem_for_component(report, bundle, weights, label, far_field=0.0):
    """Build the :class:`BieProblem` of component **label**.

    The band points of the problem are those on either side of the
    boundary pieces of the component.  The Dirichlet data is ``-kappa`` at
    the projections, ``kappa`` being the curvature of the solid
    (:attr:`.levelset.DistanceBundle.total_curvature`).

    :param report:
        :class:`.topology.TopologyReport` with anchors and pieces.
    :param bundle:
        :class:`.levelset.DistanceBundle` of the band.
    :param weights:
        :class:`.levelset.JacobianWeights` of the band.
    :param label:
        Component label.
    :param far_field:
        ``u`` at infinity for the unbounded component in 3D.

    """
    component = report.components[label]
    own = report.band_labels
    partners = report.band_partners
    positions = np.flatnonzero((own == label) | (partners == label))
    other = np.where(own[positions] == label, partners[positions],
                     own[positions])
    if label == 0:
        sign = 1.0
        if bundle.grid.dim == 2:
            kind = EXTERIOR_BOUNDED_2D
        elif far_field:
            kind = EXTERIOR_FARFIELD_3D
        else:
            kind = EXTERIOR_DECAY_3D
    else:
        sign = 1.0 if component.solid else -1.0
        kind = INTERIOR
        far_field = 0.0
    holes = sorted(component.holes)
    piece_ids = np.full(len(positions), -1, dtype=int)
    for number, hole in enumerate(holes):
        piece_ids[other == hole] = number
    anchors = [report.components[hole].anchor for hole in holes]
    curvature = bundle.total_curvature[positions]
    return BieProblem(
        kind,
        points=bundle.closest_points[positions],
        normals=sign * bundle.normals[positions],
        curvature=sign * curvature,
        weights=weights.weights[positions],
        data=-curvature,
        spacing=bundle.grid.spacing,
        anchors=np.array(anchors).reshape(-1, bundle.grid.dim),
        piece_ids=piece_ids,
        far_field=far_field,
        label=label,
        positions=positions)


class LinearSystem(object):

    """Square system ``M [beta, A] = rhs`` of a :class:`BieProblem`.

    The first ``N`` rows discretize the boundary limit of the potential,
    the last ``L`` rows hold the constraints, each scaled to unit norm.

    :param problem:
        The :class:`BieProblem`.
    :param kernel_correction:
        Subtract ``|x - y|**(2 - m)`` from the kernel of exterior problems.

    """

    def __init__(self, problem, kernel_correction=True):
        self.problem = problem
        self.kernel_correction = bool(kernel_correction and problem.exterior)
        self.size = problem.size + problem.holes
        self.rhs = np.concatenate([
            problem.data - problem.far_field, np.zeros(problem.holes)])
        if problem.holes:
            self._sources = fundamental_solution(
                problem.points[:, np.newaxis], problem.anchors[np.newaxis])
        else:
            self._sources = np.zeros((problem.size, 0))
        self.constraints = self._constraint_rows()
        self._dense = None

    def _constraint_rows(self):
        problem = self.problem
        rows = []
        pieces = range(problem.holes)
        if problem.kind == EXTERIOR_BOUNDED_2D:
            pieces = range(problem.holes - 1)
        for hole in pieces:
            rows.append(np.concatenate([problem.piece_weights(hole),
                                        np.zeros(problem.holes)]))
        if problem.kind == EXTERIOR_BOUNDED_2D:
            rows.append(np.concatenate([np.zeros(problem.size),
                                        np.ones(problem.holes)]))
        rows = np.array(rows).reshape(-1, self.size)
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms == 0):
            raise exceptions.SolverFailureError(
                'a hole boundary carries no band points', residual=np.inf)
        return rows / norms[:, np.newaxis]

    def kernel_block(self, rows):
        """Return the weighted kernel matrix of the band rows **rows**."""
        problem = self.problem
        x = problem.points[rows][:, np.newaxis]
        y = problem.points[np.newaxis]
        near = 0.5 * problem.spacing
        kernel = double_layer_kernel(
            x, y, problem.normals[np.newaxis],
            curvature=problem.curvature[np.newaxis], near=near)
        if self.kernel_correction:
            if problem.dim == 2:
                kernel = kernel - 1.0
            else:
                r = np.linalg.norm(y - x, axis=-1)
                kernel = kernel - np.where(r < near, 0.0,
                                           1.0 / np.maximum(r, near))
        return kernel * problem.weights[np.newaxis]

    def _blocks(self):
        for start in range(0, self.problem.size, _BLOCK_SIZE):
            yield slice(start, min(start + _BLOCK_SIZE, self.problem.size))

    def dense(self):
        """Return the full system matrix, built once and cached."""
        if self._dense is None:
            problem = self.problem
            matrix = np.zeros((self.size, self.size))
            for rows in self._blocks():
                matrix[rows, :problem.size] = self.kernel_block(rows)
            band = np.arange(problem.size)
            matrix[band, band] += problem.jump
            matrix[:problem.size, problem.size:] = self._sources
            matrix[problem.size:] = self.constraints
            self._dense = matrix
        return self._dense

    def matvec(self, vector):
        """Apply the system matrix without storing it."""
        if self._dense is not None:
            return self._dense.dot(vector)
        problem = self.problem
        beta = vector[:problem.size]
        result = np.empty(self.size)
        for rows in self._blocks():
            result[rows] = self.kernel_block(rows).dot(beta)
        result[:problem.size] += problem.jump * beta
        result[:problem.size] += self._sources.dot(vector[problem.size:])
        result[problem.size:] = self.constraints.dot(vector)
        return result

    def operator(self):
        return scipy.sparse.linalg.LinearOperator(
            (self.size, self.size), matvec=self.matvec, dtype=float)

    def residual(self, vector):
        """Relative residual ``|M v - rhs| / |rhs|``."""
        scale = np.linalg.norm(self.rhs)
        error = np.linalg.norm(self.matvec(vector) - self.rhs)
        return float(error / scale) if scale else float(error)


def assemble_interior(problem):
    """Return the :class:`LinearSystem` of an interior problem."""
    if problem.kind != INTERIOR:
        raise ValueError('assemble_interior needs an interior problem, '
                         'got {0!r}'.format(problem.kind))
    return LinearSystem(problem)


def assemble_exterior(problem, kernel_correction=True):
    """Return the :class:`LinearSystem` of an exterior problem.

    :param kernel_correction:
        ``False`` keeps the plain double layer kernel, whose system is
        singular when there is more than one boundary piece.

    """
    if not problem.exterior:
        raise ValueError('assemble_exterior needs an exterior problem, '
                         'got {0!r}'.format(problem.kind))
    return LinearSystem(problem, kernel_correction=kernel_correction)


def assemble(problem):
    if problem.exterior:
        return assemble_exterior(problem)
    return assemble_interior(problem)


class BieSolution(object):

    """Density and constants solving a :class:`LinearSystem`.

    :param system:
        The solved :class:`LinearSystem`.
    :param density:
        ``(N,)`` density at the band points.
    :param constants:
        ``(L,)`` coefficients of the hole sources.
    :param residual:
        Relative residual of the solve.
    :param iterations:
        Krylov iterations used, ``0`` for a direct solve.
    :param method:
        ``'gmres'`` or ``'dense'``.

    """

    def __init__(self, system, density, constants, residual, iterations=0,
                 method='gmres'):
        self.system = system
        self.density = density
        self.constants = constants
        self.residual = residual
        self.iterations = iterations
        self.method = method

    @property
    def problem(self):
        return self.system.problem

    @property
    def kernel_correction(self):
        return self.system.kernel_correction

    @property
    def constraint_residual(self):
        """Largest violation of the constraint rows."""
        if not len(self.system.constraints):
            return 0.0
        vector = np.concatenate([self.density, self.constants])
        return float(np.max(np.abs(self.system.constraints.dot(vector))))


def solve(system, tol=SOLVER_TOL, dense_limit=DENSE_LIMIT, method='auto'):
    """Solve **system**.

    ``'auto'`` runs restarted GMRES and falls back to a dense LU
    factorization when GMRES stalls and the system has at most
    **dense_limit** unknowns.

    Return a :class:`BieSolution`.

    Raise :exc:`.exceptions.SolverFailureError` with the best residual
    reached when no method succeeds.

    :param system:
        The :class:`LinearSystem`.
    :param tol:
        Relative residual to reach.
    :param dense_limit:
        Largest system solved with dense matrices.
    :param method:
        ``'auto'``, ``'gmres'`` or ``'dense'``.

    """
    if method not in ('auto', 'gmres', 'dense'):
        raise ValueError('Unknown solver method: {0!r}'.format(method))
    if method == 'dense':
        return _solve_dense(system, tol)
    if system.size <= dense_limit:
        system.dense()
    vector, iterations, converged = _gmres(system, tol)
    residual = system.residual(vector)
    log.debug('gmres: %d iterations, residual %.3g', iterations, residual)
    if converged:
        return _solution(system, vector, residual, iterations, 'gmres')
    if method == 'auto' and system.size <= dense_limit:
        log.warning('gmres stalled at residual %.3g, falling back to dense '
                    'LU', residual)
        return _solve_dense(system, tol)
    raise exceptions.SolverFailureError(
        'gmres did not converge after {0} iterations'.format(iterations),
        residual=residual)


def _gmres(system, tol):
    counter = []
    vector, info = scipy.sparse.linalg.gmres(
        system.operator(), system.rhs, rtol=tol, atol=0.0,
        restart=GMRES_RESTART, maxiter=GMRES_MAX_CYCLES,
        callback=counter.append, callback_type='pr_norm')
    return vector, len(counter), info == 0


def _solve_dense(system, tol):
    try:
        factors = scipy.linalg.lu_factor(system.dense(), check_finite=True)
        vector = scipy.linalg.lu_solve(factors, system.rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise exceptions.SolverFailureError(
            'dense factorization failed: {0}'.format(exc), residual=np.inf)
    residual = system.residual(vector)
    if not np.all(np.isfinite(vector)) or residual > tol:
        raise exceptions.SolverFailureError(
            'dense solve residual above tolerance', residual=residual)
    return _solution(system, vector, residual, 0, 'dense')


def _solution(system, vector, residual, iterations, method):
    size = system.problem.size
    return BieSolution(system, vector[:size], vector[size:], residual,
                       iterations=iterations, method=method)


def eval_potential(solution, points):
    """Evaluate ``u`` at **points** off the interface.

    Points closer than about ``2h`` to the interface get the quadrature
    error of a nearly singular kernel.

    Return an array with one value per point.

    """
    problem = solution.problem
    points = np.atleast_2d(np.asarray(points, dtype=float))
    weighted = problem.weights * solution.density
    values = np.empty(len(points))
    for start in range(0, len(points), _BLOCK_SIZE):
        x = points[start:start + _BLOCK_SIZE]
        diff = problem.points[np.newaxis] - x[:, np.newaxis]
        r2 = np.maximum(np.sum(diff ** 2, axis=-1), 1e-300)
        numer = np.einsum('bnd,nd->bn', diff, problem.normals)
        kernel = numer / (_sphere_measure(problem.dim) *
                          r2 ** (problem.dim / 2.0))
        if solution.kernel_correction:
            kernel -= 1.0 if problem.dim == 2 else 1.0 / np.sqrt(r2)
        values[start:start + _BLOCK_SIZE] = kernel.dot(weighted)
    if problem.holes:
        values += fundamental_solution(
            points[:, np.newaxis], problem.anchors[np.newaxis]).dot(
                solution.constants)
    return values + problem.far_field


def eval_normal_derivative(solution, points, directions,
                           reference_density=None, distances=None):
    """Evaluate ``grad u . n`` at **points** off the interface.

    :param points:
        ``(M, dim)`` evaluation points.
    :param directions:
        ``(M, dim)`` unit directions ``n``.
    :param reference_density:
        Optional ``(M,)`` density at the projection of each point.  It is
        subtracted from the density under the double layer integral, which
        leaves the exact value unchanged and removes most of the quadrature
        error close to the interface.
    :param distances:
        Optional ``(M,)`` signed distances of the points; when given, points
        closer than ``h / 2`` raise
        :exc:`.exceptions.TooCloseToInterfaceError`.

    """
    problem = solution.problem
    points = np.atleast_2d(np.asarray(points, dtype=float))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if distances is not None:
        close = np.abs(distances) < 0.5 * problem.spacing
        if np.any(close):
            raise exceptions.TooCloseToInterfaceError(
                'too close to interface: {0} points within h/2'.format(
                    int(np.sum(close))))
    weighted = problem.weights * solution.density
    gradient = np.empty(points.shape)
    for start in range(0, len(points), _BLOCK_SIZE):
        block = slice(start, start + _BLOCK_SIZE)
        x = points[block]
        kernel = double_layer_gradient(
            x[:, np.newaxis], problem.points[np.newaxis],
            problem.normals[np.newaxis])
        if reference_density is None:
            density = np.broadcast_to(weighted, kernel.shape[:2])
        else:
            density = problem.weights[np.newaxis] * (
                solution.density[np.newaxis] -
                np.asarray(reference_density)[block, np.newaxis])
        gradient[block] = np.einsum('bn,bnd->bd', density, kernel)
        if solution.kernel_correction and problem.dim == 3:
            diff = x[:, np.newaxis] - problem.points[np.newaxis]
            r = np.linalg.norm(diff, axis=-1)[..., np.newaxis]
            gradient[block] += np.einsum('n,bnd->bd', weighted, diff / r ** 3)
    if problem.holes:
        sources = fundamental_gradient(
            points[:, np.newaxis], problem.anchors[np.newaxis])
        gradient += np.einsum('i,mid->md', solution.constants, sources)
    return np.sum(gradient * directions, axis=1)


def boundary_flux(solution, offset=None):
    """Integrate the normal derivative of ``u`` over the interface.

    The derivative along the problem normals is taken at the points
    ``P(x_k)`` moved by **offset** (default ``2h``) into the component
    and summed with the quadrature weights.  For the bounded 2D exterior
    solution the result vanishes up to discretization error.

    """
    problem = solution.problem
    if offset is None:
        offset = 2.0 * problem.spacing
    points = problem.points + problem.side * offset * problem.normals
    derivative = eval_normal_derivative(
        solution, points, problem.normals,
        reference_density=solution.density)
    return float(np.dot(problem.weights, derivative))
