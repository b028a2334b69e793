"""Interface motion: normal velocity from the flux jump, its extension off
the interface, level set advection and the time stepper.

The normal velocity is positive where the solid melts; the level set
moves by ``phi_t + v |grad phi| = 0``.

"""

import concurrent.futures
import logging

import numpy as np

from . import bie
from . import diagnostics
from . import exceptions
from . import grid as gridmod
from . import levelset
from . import topology


log = logging.getLogger(__name__)

#: Half-width, in grid spacings, of the layer where the jump is evaluated.
INNER_LAYER = 3.0
EXTENSION_TOL = 1e-6
EXTENSION_MAX_ITERATIONS = 2000
CLAMP_MODES = ('magnitude', 'literal')

_WENO_EPS = 1e-6


class VelocityField(object):

    """Normal velocity at the narrow band points.

    :param band:
        The :class:`.grid.NarrowBand` the values refer to.
    :param values:
        ``(N,)`` velocities.
    :param known:
        ``(N,)`` mask of the points holding data; the others are filled by
        :func:`extend_velocity`.
    :param v_clamp:
        Speed bound once clamped, ``None`` before.

    """

    def __init__(self, band, values, known=None, v_clamp=None):
        self.band = band
        self.values = np.asarray(values, dtype=float)
        if known is None:
            known = np.ones(len(self.values), dtype=bool)
        self.known = np.asarray(known, dtype=bool)
        self.v_clamp = v_clamp

    def __len__(self):
        return len(self.values)

    @property
    def max_speed(self):
        if not len(self.values):
            return 0.0
        return float(np.max(np.abs(self.values)))

    def as_field(self):
        """Return the velocity on the whole grid, zero off the band."""
        values = np.zeros(self.band.grid.size)
        values[self.band.indices] = np.where(self.known, self.values, 0.0)
        return gridmod.ScalarField(self.band.grid, values)


class Geometry(object):

    """Everything derived from one signed distance at band half-width
    **eps**: band, closest points, weights and topology."""

    def __init__(self, eps, band, bundle, weights, report):
        self.eps = eps
        self.band = band
        self.bundle = bundle
        self.weights = weights
        self.report = report


def analyze(distance, eps):
    """Build the :class:`Geometry` of a signed distance field."""
    band = gridmod.build_band(distance, eps)
    bundle = levelset.closest_point_map(distance, band)
    weights = levelset.jacobian_and_kernel_weights(bundle, eps)
    report = topology.label_components(distance)
    report.require_window()
    report = topology.select_anchors(report, distance)
    report = topology.assign_boundary_pieces(report, bundle)
    log.debug('band of %d points, %d pieces', len(band), report.piece_count)
    return Geometry(eps, band, bundle, weights, report)


class SimState(object):

    """Interface at one instant of a run.

    :param distance:
        Signed distance :class:`.grid.ScalarField` of the interface.
    :param time:
        Simulation time.
    :param step:
        Number of steps taken so far.
    :param dt:
        Size of the step that produced this state.
    :param series:
        :class:`.diagnostics.TimeSeries` recorded up to this state.

    """

    def __init__(self, distance, time=0.0, step=0, dt=0.0, series=None):
        self.distance = distance
        self.time = float(time)
        self.step = int(step)
        self.dt = float(dt)
        if series is None:
            series = diagnostics.TimeSeries()
        self.series = series
        self._geometry = {}

    @property
    def grid(self):
        return self.distance.grid

    def geometry(self, eps):
        """Return the :class:`Geometry` of the state, computed once."""
        if eps not in self._geometry:
            self._geometry[eps] = analyze(self.distance, eps)
        return self._geometry[eps]

    def advance(self, distance, dt):
        """Return the state **dt** later with the new **distance**."""
        return SimState(distance, self.time + dt, self.step + 1, dt,
                        self.series)

    def checkpoint(self, path, **metadata):
        """Write the distance field and scalars as a grid snapshot."""
        gridmod.write_snapshot(path, self.distance, time=self.time,
                               step=self.step, dt=self.dt, **metadata)

    @classmethod
    def from_checkpoint(cls, path):
        """Read a state written by :meth:`checkpoint`; the series starts
        empty."""
        field, time, metadata = gridmod.read_snapshot(path)
        return cls(field, time=time, step=int(metadata.get('step', 0)),
                   dt=float(metadata.get('dt', 0.0)))


def solve_components(geometry, far_field=0.0, tol=bie.SOLVER_TOL,
                     dense_limit=bie.DENSE_LIMIT, threads=1):
    """Solve the boundary integral problem of every component touching the
    band.

    Return a dict mapping component labels to :class:`.bie.BieSolution`.

    """
    report = geometry.report
    labels = sorted(set(report.band_labels.tolist()) |
                    set(report.band_partners.tolist()))

    def solve_one(label):
        problem = bie.problem_for_component(
            report, geometry.bundle, geometry.weights, label,
            far_field=far_field)
        solution = bie.solve(bie.assemble(problem), tol=tol,
                             dense_limit=dense_limit)
        log.debug('component %d: %d unknowns, %s, residual %.3g', label,
                  solution.system.size, solution.method, solution.residual)
        return solution

    if threads > 1 and len(labels) > 1:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            solutions = list(pool.map(solve_one, labels))
    else:
        solutions = [solve_one(label) for label in labels]
    return dict(zip(labels, solutions))


def mirror_points(points, distances, gradients, projections=None,
                  spacing=None):
    """Evaluation and mirror points of the flux jump.

    A point is solid when ``d > 0`` and liquid otherwise, the predicate
    :func:`.topology.label_components` labels with.  The mirror of ``x``
    is ``x - 2 d(x) grad d(x)``.  Given **projections** and **spacing**,
    points with ``|d| < spacing/2`` are evaluated one spacing out from
    their projection on their own side and mirrored one spacing out on the
    other side.

    Return ``(side, own_points, mirrors)``, ``side`` being ``+1`` for solid
    and ``-1`` for liquid points.

    """
    points = np.asarray(points, dtype=float)
    distances = np.asarray(distances, dtype=float)
    gradients = np.asarray(gradients, dtype=float)
    side = np.where(distances > 0, 1.0, -1.0)
    own = points.copy()
    mirrors = points - 2.0 * distances[:, np.newaxis] * gradients
    if projections is not None:
        projections = np.asarray(projections, dtype=float)
        norm = np.maximum(np.linalg.norm(gradients, axis=1), 1e-12)
        shift = (side * spacing / norm)[:, np.newaxis] * gradients
        close = np.abs(distances) < 0.5 * spacing
        own[close] = projections[close] + shift[close]
        mirrors[close] = projections[close] - shift[close]
    return side, own, mirrors


def mirror_jump(side, own_points, mirrors, normals, solid_derivative,
                liquid_derivative):
    """Flux jump from one-sided normal derivatives.

        v = side * (du/dn(mirror) - du/dn(own point))

    with every derivative taken from the field of the side its evaluation
    point lies on.  This is the liquid minus the solid normal derivative
    whatever the side of the point.

    :param side:
        ``(N,)`` ``+1`` for solid and ``-1`` for liquid points, see
        :func:`mirror_points`.
    :param normals:
        ``(N, dim)`` normals ``-grad d`` the derivatives are taken along.
    :param solid_derivative:
        Callable ``f(points, directions, rows)`` giving the normal
        derivatives of the solid side field; ``rows`` are the positions of
        the points in the input arrays.
    :param liquid_derivative:
        The same for the liquid side.

    """
    side = np.asarray(side, dtype=float)
    own_points = np.asarray(own_points, dtype=float)
    mirrors = np.asarray(mirrors, dtype=float)
    normals = np.asarray(normals, dtype=float)
    rows = np.arange(len(side))
    own = np.empty(len(side))
    other = np.empty(len(side))
    solid = side > 0
    for select, here, there in ((solid, solid_derivative, liquid_derivative),
                                (~solid, liquid_derivative, solid_derivative)):
        if not np.any(select):
            continue
        own[select] = here(own_points[select], normals[select], rows[select])
        other[select] = there(mirrors[select], normals[select], rows[select])
    return side * (other - own)


def jump_velocity_near_band(solutions, bundle, report, layer=INNER_LAYER):
    """Normal velocity on the inner layer ``|d| <= layer * h``.

    Points and mirrors come from :func:`mirror_points`, the jump from
    :func:`mirror_jump`.  Each derivative uses the solution of the
    component its point belongs to and subtracts the density at the shared
    projection.

    Return a :class:`VelocityField` with the layer marked known.

    Raise :exc:`.exceptions.WindowTooSmallError` when a mirror point falls
    outside the grid box.

    :param solutions:
        Dict of :class:`.bie.BieSolution` per component label.
    :param bundle:
        :class:`.levelset.DistanceBundle` of the band.
    :param report:
        :class:`.topology.TopologyReport` with boundary pieces.

    """
    grid = bundle.grid
    h = grid.spacing
    distance = bundle.distance
    inner = np.flatnonzero(np.abs(distance) <= layer * h)
    normals = bundle.normals[inner]
    projections = bundle.closest_points[inner]
    side, own_points, mirrors = mirror_points(
        bundle.points[inner], distance[inner], bundle.gradient[inner],
        projections, h)
    if not np.all(grid.contains(mirrors)):
        raise exceptions.WindowTooSmallError(
            'window too small: mirror point outside the grid box')

    own_labels = report.band_labels[inner]
    partners = report.band_partners[inner]
    landed = report.labels[tuple(grid.nearest_indices(mirrors).T)]
    third = (landed != partners) & (landed != own_labels)
    if np.any(third):
        log.warning('%d mirror points fall in a third component, using the '
                    'one-sided value', int(np.sum(third)))
        mirrors[third] = (projections[third] +
                          (side[third] * h)[:, np.newaxis] * normals[third])

    solid_labels = np.where(side > 0, own_labels, partners)
    liquid_labels = np.where(side > 0, partners, own_labels)

    def solid_derivative(points, directions, rows):
        return _derivatives(solutions, solid_labels[rows], inner[rows],
                            points, directions)

    def liquid_derivative(points, directions, rows):
        return _derivatives(solutions, liquid_labels[rows], inner[rows],
                            points, directions)

    values = np.zeros(len(bundle))
    values[inner] = mirror_jump(side, own_points, mirrors, normals,
                                solid_derivative, liquid_derivative)
    known = np.zeros(len(bundle), dtype=bool)
    known[inner] = True
    return VelocityField(bundle.band, values, known)


def _derivatives(solutions, labels, positions, points, directions):
    result = np.empty(len(points))
    for label in np.unique(labels):
        select = labels == label
        solution = solutions[int(label)]
        rows = np.searchsorted(solution.problem.positions, positions[select])
        result[select] = bie.eval_normal_derivative(
            solution, points[select], directions[select],
            reference_density=solution.density[rows])
    return result


def clamp(values, v_clamp, mode='magnitude'):
    """Bound velocities by **v_clamp**.

    ``'magnitude'`` limits ``|v|`` to ``v_clamp``.  ``'literal'`` replaces
    ``v`` by ``max(v, v_clamp)``, **v_clamp** being a signed floor.

    """
    if mode == 'magnitude':
        return np.clip(values, -v_clamp, v_clamp)
    if mode == 'literal':
        return np.maximum(values, v_clamp)
    raise ValueError('Unknown clamp mode: {0!r}'.format(mode))


def extend_velocity(velocity, bundle, v_clamp, clamp_mode='magnitude',
                    tol=EXTENSION_TOL, max_iterations=EXTENSION_MAX_ITERATIONS):
    """Extend known velocities to the whole band, constant along normals.

    Iterates ``v_tau + sign(d) n . grad v = 0`` with first-order upwind
    differences and explicit pseudo-time steps, the known points held
    fixed, until the largest update is below ``tol * v_clamp``.  The
    result is clamped with :func:`clamp`.

    Return a new :class:`VelocityField` known on every band point.

    """
    grid = bundle.grid
    h = grid.spacing
    indices = bundle.band.indices
    size = len(indices)
    lookup = np.full(grid.size, -1, dtype=np.int64)
    lookup[indices] = np.arange(size)
    multi = grid.unravel(indices)
    norm = np.maximum(np.linalg.norm(bundle.gradient, axis=1), 1e-12)
    sign = np.where(bundle.distance > 0, 1.0, -1.0)
    direction = sign[:, np.newaxis] * bundle.gradient / norm[:, np.newaxis]

    upwind = []
    coefficients = []
    for axis in range(grid.dim):
        neighbor = multi.copy()
        neighbor[:, axis] -= np.where(direction[:, axis] > 0, 1, -1)
        inside = np.all((neighbor >= 0) &
                        (neighbor < np.array(grid.extents)), axis=1)
        flat = np.ravel_multi_index(
            tuple(np.clip(neighbor, 0, np.array(grid.extents) - 1).T),
            grid.extents)
        position = np.where(inside, lookup[flat], -1)
        missing = position < 0
        upwind.append(np.where(missing, np.arange(size), position))
        coefficients.append(np.where(missing, 0.0,
                                     np.abs(direction[:, axis]) / h))
    step = 0.5 / max(float(np.max(np.sum(coefficients, axis=0))), 1.0 / h)

    values = np.where(velocity.known, velocity.values, 0.0)
    free = ~velocity.known
    limit = tol * abs(v_clamp)
    rate = np.zeros(size)
    for iteration in range(1, max_iterations + 1):
        rate = sum(c * (values - values[u])
                   for c, u in zip(coefficients, upwind))
        rate[~free] = 0.0
        update = step * rate
        values = values - update
        if not np.any(free) or np.max(np.abs(update)) < limit:
            break
    else:
        log.warning('velocity extension stopped after %d iterations',
                    max_iterations)
    log.debug('velocity extension: %d iterations', iteration)

    scale = max(float(np.max(np.abs(values))), 1e-300)
    defect = float(np.max(np.abs(rate))) * h / scale if np.any(free) else 0.0
    if defect > 0.1:
        log.warning('extended velocity is not constant along normals, '
                    'relative defect %.3g', defect)
    values = clamp(values, v_clamp, clamp_mode)
    return VelocityField(bundle.band, values, v_clamp=v_clamp)


def time_step(velocity, spacing, cfl, v_clamp):
    """Largest step ``cfl * h / max|v|`` allowed by **velocity**; the clamp
    value stands in for a vanishing velocity."""
    speed = velocity.max_speed or abs(v_clamp)
    return cfl * spacing / speed


def advect(phi, velocity, dt, cfl=0.5):
    """Advance ``phi_t + v |grad phi| = 0`` by one TVD Runge-Kutta step.

    ``|grad phi|`` is the Godunov Hamiltonian of third-order WENO one-sided
    differences.  Values outside the band are left as they are.

    Raise :exc:`.exceptions.CFLViolationError` when ``dt`` exceeds
    ``cfl * h / max|v|``.

    :param phi:
        :class:`.grid.ScalarField` to move.
    :param velocity:
        :class:`VelocityField` on the band of **phi**.
    :param dt:
        Time step.

    """
    h = phi.grid.spacing
    speed = velocity.as_field().values
    top = float(np.max(np.abs(speed)))
    if top > 0:
        allowed = cfl * h / top
        if dt > allowed * (1.0 + 1e-12):
            raise exceptions.CFLViolationError(
                'time step {0:.3g} violates the CFL condition, use '
                'dt <= {1:.3g}'.format(dt, allowed), suggested_dt=allowed)
    else:
        return phi.with_values(phi.values)
    band = velocity.band.mask()

    def rate(u):
        return -speed * _godunov_norm(u, speed, h)

    u0 = np.array(phi.values)
    u1 = u0 + dt * rate(u0)
    u2 = 0.75 * u0 + 0.25 * (u1 + dt * rate(u1))
    u3 = u0 / 3.0 + 2.0 / 3.0 * (u2 + dt * rate(u2))
    return phi.with_values(np.where(band, u3, u0))


def _godunov_norm(u, speed, h):
    moving_in = speed > 0
    total = np.zeros(u.shape)
    for axis in range(u.ndim):
        minus, plus = _weno3_derivatives(u, axis, h)
        grow = np.maximum(np.maximum(minus, 0.0) ** 2,
                          np.minimum(plus, 0.0) ** 2)
        shrink = np.maximum(np.minimum(minus, 0.0) ** 2,
                            np.maximum(plus, 0.0) ** 2)
        total += np.where(moving_in, grow, shrink)
    return np.sqrt(total)


def _weno3_derivatives(u, axis, h):
    pad = [(0, 0)] * u.ndim
    pad[axis] = (2, 2)
    differences = np.diff(np.pad(u, pad, mode='edge'), axis=axis) / h
    n = u.shape[axis]

    def window(start):
        return np.take(differences, np.arange(start, start + n), axis=axis)

    minus = _weno3(window(0), window(1), window(2))
    plus = _weno3(window(3), window(2), window(1))
    return minus, plus


def _weno3(far, near, across):
    one_sided = 1.5 * near - 0.5 * far
    central = 0.5 * (near + across)
    alpha_one = (1.0 / 3.0) / (_WENO_EPS + (near - far) ** 2) ** 2
    alpha_central = (2.0 / 3.0) / (_WENO_EPS + (across - near) ** 2) ** 2
    total = alpha_one + alpha_central
    return (alpha_one * one_sided + alpha_central * central) / total


def step(state, config, dt_max=None):
    """Advance **state** by one time step.

    Pipeline: labeling and geometry, one boundary integral solve per
    component with data ``-kappa``, flux jump on the inner layer,
    extension and clamp, advection by the CFL step, redistancing, and a
    diagnostics record.

    Return the new :class:`SimState`.  Errors carry the index of the
    failing step.

    :param config:
        Object with the attributes ``eps_ratio``, ``cfl``, ``v_clamp``,
        ``clamp_mode``, ``far_field``, ``solver_tol``, ``dense_limit`` and
        ``threads``, such as :class:`.config.RunConfig`.
    :param dt_max:
        Optional upper bound on the step, e.g. the time left in the run.

    """
    eps = config.eps_ratio * state.grid.spacing
    try:
        geometry = state.geometry(eps)
        solutions = solve_components(
            geometry, far_field=config.far_field, tol=config.solver_tol,
            dense_limit=config.dense_limit, threads=config.threads)
        inner = jump_velocity_near_band(
            solutions, geometry.bundle, geometry.report)
        velocity = extend_velocity(
            inner, geometry.bundle, config.v_clamp, config.clamp_mode)
        dt = time_step(velocity, state.grid.spacing, config.cfl,
                       config.v_clamp)
        if dt_max is not None:
            dt = min(dt, dt_max)
        phi = advect(state.distance, velocity, dt, config.cfl)
        following = state.advance(levelset.redistance(phi), dt)
        record = diagnostics.measure(following, eps, velocity=velocity,
                                     solutions=solutions)
    except exceptions.SimulationError as exc:
        if exc.step is None:
            exc.step = state.step + 1
        raise
    following.series = state.series.appended(record)
    return following
