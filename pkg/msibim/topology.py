"""Connected component labeling of the sign regions of a distance field.

Labels follow the solid/liquid convention: ``0`` is the unbounded
component, positive labels are solid components (``d > 0``) and negative
labels are bounded liquid components.  Two components that touch share
exactly one connected interface, the boundary piece named by the pair of
their labels.

"""

import copy
import itertools
import logging

import numba
import numpy as np

from . import exceptions


log = logging.getLogger(__name__)


@numba.njit
def find(parents, label):
    """Return the root of **label** in the forest **parents**, compressing
    the path."""
    root = label
    while parents[root] != root:
        root = parents[root]
    while parents[label] != root:
        following = parents[label]
        parents[label] = root
        label = following
    return root


@numba.njit
def union(parents, a, b):
    """Merge the classes of **a** and **b**; return the new root.

    The root of a class is always its smallest member, so that relabeling
    keeps the order in which labels were first created.

    """
    ra = find(parents, a)
    rb = find(parents, b)
    if ra == rb:
        return ra
    if ra < rb:
        parents[rb] = ra
        return ra
    parents[ra] = rb
    return rb


@numba.njit
def _first_pass(solid, shape, strides):
    size = solid.shape[0]
    provisional = np.empty(size, dtype=np.int64)
    parents = np.empty(size, dtype=np.int64)
    class_solid = np.empty(size, dtype=np.bool_)
    count = 0
    for position in range(size):
        here = solid[position]
        label = -1
        for axis in range(shape.shape[0]):
            if (position // strides[axis]) % shape[axis] == 0:
                continue
            neighbor = position - strides[axis]
            if solid[neighbor] != here:
                continue
            root = find(parents, provisional[neighbor])
            if label < 0:
                label = root
            else:
                label = union(parents, label, root)
        if label < 0:
            label = count
            parents[count] = count
            class_solid[count] = here
            count += 1
        provisional[position] = label
    return provisional, parents[:count], class_solid[:count]


@numba.njit
def _roots(parents):
    roots = np.empty_like(parents)
    for label in range(parents.shape[0]):
        roots[label] = find(parents, label)
    return roots


class Component(object):

    """One connected sign region.

    :param label:
        Signed component label.
    :param solid:
        ``True`` for ``d > 0`` regions.
    :param size:
        Number of grid points in the component.

    """

    def __init__(self, label, solid, size):
        self.label = label
        self.solid = solid
        self.size = size
        #: Label of the neighbor on the path towards the unbounded component.
        self.parent = None
        #: Labels of the enclosed neighbors, the holes of this component.
        self.holes = []
        #: Flat grid index of the anchor point, see :func:`select_anchors`.
        self.anchor_index = None
        #: Coordinates of the anchor point.
        self.anchor = None

    @property
    def bounded(self):
        return self.label != 0

    def __repr__(self):
        return 'Component(label={0}, solid={1}, size={2})'.format(
            self.label, self.solid, self.size)


class TopologyReport(object):

    """Result of the labeling passes.

    :param grid:
        The labeled :class:`.grid.Grid`.
    :param labels:
        Integer label per grid point.
    :param components:
        Mapping of label to :class:`Component`.
    :param adjacency:
        Sorted list of ``(a, b)`` label pairs, ``a < b``, of touching
        components; each pair is one boundary piece.
    :param window_ok:
        ``True`` when the unbounded component is liquid and is the only
        component reaching the faces of the grid box.

    """

    def __init__(self, grid, labels, components, adjacency, window_ok):
        self.grid = grid
        self.labels = labels
        self.components = components
        self.adjacency = adjacency
        self.window_ok = window_ok
        #: Band indices the piece arrays below refer to.
        self.band_indices = None
        #: Component label of each band point.
        self.band_labels = None
        #: Label of the opposite component at each band point's projection.
        self.band_partners = None

    def evolve(self):
        """Return a shallow copy with fresh component objects."""
        report = copy.copy(self)
        report.components = dict(
            (label, copy.copy(component))
            for label, component in self.components.items())
        return report

    @property
    def component_labels(self):
        return sorted(self.components)

    @property
    def pieces(self):
        """Boundary pieces carried by the band, as sorted label pairs."""
        if self.band_labels is None:
            return list(self.adjacency)
        pairs = set(zip(np.minimum(self.band_labels, self.band_partners),
                        np.maximum(self.band_labels, self.band_partners)))
        return sorted((int(a), int(b)) for a, b in pairs)

    @property
    def piece_count(self):
        return len(self.pieces)

    def neighbors(self, label):
        """Return the labels touching component **label**."""
        found = []
        for a, b in self.adjacency:
            if a == label:
                found.append(b)
            elif b == label:
                found.append(a)
        return sorted(found)

    def require_window(self):
        """Raise :exc:`.exceptions.WindowTooSmallError` unless
        :attr:`window_ok`."""
        if not self.window_ok:
            raise exceptions.WindowTooSmallError(
                'window too small: a bounded component touches the grid box')


def label_components(d):
    """Label the face-connected sign regions of **d**.

    First pass: raster scan; each point looks at its already visited face
    neighbors of the same sign, takes the smallest root among them and
    merges their classes, or opens a new class.  Second pass: every point
    takes the root of its class.  Roots are renumbered per sign in order of
    creation; the class of the first box corner becomes label ``0``.

    Return a :class:`TopologyReport` without anchors or pieces.

    :param d:
        :class:`.grid.ScalarField`; only the sign is used.

    """
    grid = d.grid
    solid = (d.values > 0).ravel()
    shape = grid.shape
    strides = np.array([int(np.prod(shape[axis + 1:]))
                        for axis in range(grid.dim)], dtype=np.int64)
    provisional, parents, class_solid = _first_pass(
        solid, np.array(shape, dtype=np.int64), strides)
    roots = _roots(parents)
    final = _renumber(roots, class_solid)
    labels = final[provisional].reshape(shape)

    components = {}
    counts = np.bincount(final[provisional] - final.min())
    for label in np.unique(final):
        root = int(roots[final == label][0])
        components[int(label)] = Component(
            int(label), bool(class_solid[root]),
            int(counts[label - final.min()]))
    adjacency = _adjacency(labels)
    window_ok = (not components[0].solid and
                 bool(np.all(labels[grid.boundary_mask()] == 0)))
    report = TopologyReport(grid, labels, components, adjacency, window_ok)
    _link_tree(report)
    log.debug('labeled %d components, %d boundary pieces',
              len(components), len(adjacency))
    return report


def _renumber(roots, class_solid):
    final = np.zeros(len(roots), dtype=np.int64)
    outer = roots[0]
    positive = negative = 0
    assigned = {outer: 0}
    for root in sorted(set(roots.tolist())):
        if root == outer:
            continue
        if class_solid[root]:
            positive += 1
            assigned[root] = positive
        else:
            negative += 1
            assigned[root] = -negative
    for label, root in enumerate(roots):
        final[label] = assigned[root]
    return final


def _adjacency(labels):
    pairs = set()
    for axis in range(labels.ndim):
        lower = [slice(None)] * labels.ndim
        upper = [slice(None)] * labels.ndim
        lower[axis] = slice(None, -1)
        upper[axis] = slice(1, None)
        a = labels[tuple(lower)]
        b = labels[tuple(upper)]
        touching = a != b
        low = np.minimum(a, b)[touching]
        high = np.maximum(a, b)[touching]
        if len(low):
            stacked = np.unique(np.stack([low, high], axis=1), axis=0)
            pairs.update((int(x), int(y)) for x, y in stacked)
    return sorted(pairs)


def _link_tree(report):
    visited = {0}
    frontier = [0]
    while frontier:
        following = []
        for label in frontier:
            for neighbor in report.neighbors(label):
                if neighbor in visited:
                    continue
                visited.add(neighbor)
                report.components[neighbor].parent = label
                report.components[label].holes.append(neighbor)
                following.append(neighbor)
        frontier = following


def select_anchors(report, d):
    """Pick the interior anchor point of every bounded component.

    The anchor is the grid point of the component with the largest
    ``|d|``, ties going to the smallest flat index.  A warning is logged
    for components whose anchor is not deeper than one grid spacing.

    Return a new :class:`TopologyReport`.

    """
    report = report.evolve()
    grid = report.grid
    depth = np.abs(d.values).ravel()
    labels = report.labels.ravel()
    for label, component in sorted(report.components.items()):
        if not component.bounded:
            continue
        index = int(np.argmax(np.where(labels == label, depth, -1.0)))
        component.anchor_index = index
        component.anchor = grid.points(np.array([index]))[0]
        if depth[index] <= grid.spacing:
            log.warning('thin hole: component %d has maximal depth %.3g '
                        '<= h', label, depth[index])
    return report


def assign_boundary_pieces(report, bundle):
    """Find the boundary piece of every band point.

    The piece of ``x`` is the pair of its own label and the label of
    opposite sign found among the vertices of the grid cell containing
    ``P(x)``, the nearest such vertex winning.  When the cell has no such
    vertex the surrounding ``4**m`` vertices are searched.

    Return a new :class:`TopologyReport` with :attr:`band_labels` and
    :attr:`band_partners` set.

    Raise :exc:`.exceptions.AmbiguousProjectionError` if no opposite label
    is found.

    """
    report = report.evolve()
    grid = report.grid
    indices = bundle.band.indices
    values = bundle.field.values
    own = report.labels.ravel()[indices]
    own_solid = values.ravel()[indices] > 0
    projections = bundle.closest_points
    base = np.floor((projections - grid.origin) / grid.spacing).astype(int)

    partners, found = _nearest_opposite(
        grid, report.labels, values, projections, base, own_solid, (0, 1))
    missing = np.flatnonzero(~found)
    if len(missing):
        wide, wide_found = _nearest_opposite(
            grid, report.labels, values, projections[missing],
            base[missing], own_solid[missing], (-1, 0, 1, 2))
        if not np.all(wide_found):
            raise exceptions.AmbiguousProjectionError(
                'ambiguous projection at {0} band points'.format(
                    int(np.sum(~wide_found))))
        partners[missing] = wide
    report.band_indices = indices
    report.band_labels = own
    report.band_partners = partners
    return report


def _nearest_opposite(grid, labels, values, projections, base, own_solid,
                      steps):
    offsets = np.array(list(itertools.product(steps, repeat=grid.dim)))
    upper = np.array(grid.extents) - 1
    vertices = np.clip(base[:, np.newaxis, :] + offsets[np.newaxis], 0, upper)
    where = tuple(np.moveaxis(vertices, -1, 0))
    vertex_labels = labels[where]
    opposite = (values[where] > 0) != own_solid[:, np.newaxis]
    coordinates = grid.origin + grid.spacing * vertices
    distance = np.sum((coordinates - projections[:, np.newaxis, :]) ** 2,
                      axis=-1)
    distance = np.where(opposite, distance, np.inf)
    nearest = np.argmin(distance, axis=1)
    partners = vertex_labels[np.arange(len(base)), nearest]
    return partners, np.any(opposite, axis=1)
