"""Uniform Cartesian grids, scalar fields and narrow bands.

Snapshot file layout (version 1)::

    MSIBIM-SNAPSHOT 1
    dim 2
    extents 129 129
    origin -2.0 -2.0
    spacing 0.03125
    time 0.0
    <key> <value>          (zero or more metadata lines)
    end
    <values>

The header is ASCII, one ``key value`` pair per line.  ``<values>`` are the
field values as little-endian float64 in row-major (C) order of the grid
index ``(i, j[, k])``, ``i`` running along the first axis.

"""

import numpy as np

from . import exceptions


SNAPSHOT_MAGIC = 'MSIBIM-SNAPSHOT 1'
_RESERVED_KEYS = ('dim', 'extents', 'origin', 'spacing', 'time')


class Grid(object):

    """Isotropic uniform grid in two or three dimensions.

    Grid point ``(i, j[, k])`` sits at ``origin + h * (i, j[, k])``.

    :param origin:
        Coordinates of the grid point with index zero.
    :param spacing:
        Grid spacing ``h``, the same along every axis.
    :param extents:
        Number of points per axis, at least 8 each.

    """

    def __init__(self, origin, spacing, extents):
        self.origin = np.asarray(origin, dtype=float)
        self.spacing = float(spacing)
        self.extents = tuple(int(n) for n in extents)
        self._validate()

    def _validate(self):
        if len(self.extents) not in (2, 3):
            raise ValueError(
                'Grid dimension must be 2 or 3, got {0}'.format(
                    len(self.extents)))
        if self.origin.shape != (len(self.extents),):
            raise ValueError('Origin must have one coordinate per axis.')
        if not self.spacing > 0:
            raise ValueError(
                'Grid spacing must be positive, got {0}'.format(self.spacing))
        if min(self.extents) < 8:
            raise ValueError(
                'Grid needs at least 8 points per axis, got {0}'.format(
                    self.extents))

    @classmethod
    def from_box(cls, lower, upper, spacing):
        """Make a grid covering the box ``[lower, upper]``.

        The upper corner is rounded to the nearest multiple of **spacing**.

        """
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        extents = np.rint((upper - lower) / spacing).astype(int) + 1
        return cls(lower, spacing, extents)

    @property
    def dim(self):
        return len(self.extents)

    @property
    def shape(self):
        return self.extents

    @property
    def size(self):
        return int(np.prod(self.extents))

    @property
    def upper(self):
        return self.origin + self.spacing * (np.array(self.extents) - 1)

    @property
    def cell_volume(self):
        return self.spacing ** self.dim

    def coordinates(self):
        """Return one coordinate array per axis, each of shape :attr:`shape`.
        """
        axes = [self.origin[a] + self.spacing * np.arange(n)
                for a, n in enumerate(self.extents)]
        return np.meshgrid(*axes, indexing='ij')

    def unravel(self, indices):
        """Return the ``(N, dim)`` multi-indices of flat **indices**."""
        return np.stack(np.unravel_index(indices, self.extents), axis=-1)

    def points(self, indices):
        """Return the ``(N, dim)`` coordinates of flat **indices**."""
        return self.origin + self.spacing * self.unravel(indices)

    def nearest_indices(self, points):
        """Return the ``(N, dim)`` multi-indices of the grid points nearest
        to **points**, clipped to the grid."""
        rel = (np.asarray(points, dtype=float) - self.origin) / self.spacing
        idx = np.rint(rel).astype(int)
        return np.clip(idx, 0, np.array(self.extents) - 1)

    def contains(self, points, margin=0.0):
        """Tell, per point, whether it lies in the box shrunk by **margin**.
        """
        points = np.asarray(points, dtype=float)
        inside = ((points >= self.origin + margin) &
                  (points <= self.upper - margin))
        return np.all(inside, axis=-1)

    def boundary_mask(self):
        """Return a boolean array marking the points on the box faces."""
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            index = [slice(None)] * self.dim
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask

    def __eq__(self, other):
        return (isinstance(other, Grid) and
                self.extents == other.extents and
                self.spacing == other.spacing and
                np.array_equal(self.origin, other.origin))

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'Grid(origin={0}, spacing={1!r}, extents={2})'.format(
            list(self.origin), self.spacing, self.extents)


class ScalarField(object):

    """Values of a function at every point of a :class:`Grid`.

    The value array is made read-only: operations that produce new values
    allocate a new field with :meth:`with_values`.

    :param grid:
        The :class:`Grid` the values live on.
    :param values:
        Array with :attr:`Grid.size` finite values, reshaped to
        :attr:`Grid.shape`.

    """

    def __init__(self, grid, values):
        values = np.array(values, dtype=float).reshape(grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError('Scalar field values must be finite.')
        values.flags.writeable = False
        self.grid = grid
        self.values = values

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(x, y[, z])`` at every grid point."""
        return cls(grid, func(*grid.coordinates()))

    def with_values(self, values):
        """Return a new field on the same grid."""
        return ScalarField(self.grid, values)

    def at(self, indices):
        """Return the values at flat **indices**."""
        return self.values.ravel()[indices]

    def __repr__(self):
        return 'ScalarField({0!r})'.format(self.grid)


class NarrowBand(object):

    """Grid points inside the tube ``|d| < eps``.

    :param grid:
        The :class:`Grid` of the indices.
    :param eps:
        Half-width of the band.
    :param indices:
        Sorted, duplicate free flat grid indices.

    """

    def __init__(self, grid, eps, indices):
        self.grid = grid
        self.eps = float(eps)
        self.indices = np.asarray(indices, dtype=np.int64)

    def __len__(self):
        return len(self.indices)

    def points(self):
        """Return the ``(N, dim)`` coordinates of the band points."""
        return self.grid.points(self.indices)

    def mask(self):
        """Return a boolean grid array marking the band points."""
        mask = np.zeros(self.grid.size, dtype=bool)
        mask[self.indices] = True
        return mask.reshape(self.grid.shape)


def build_band(field, eps):
    """Collect the grid points with ``|field| < eps``.

    Return a :class:`NarrowBand` with indices in lexicographic (row-major)
    order.

    Raise :exc:`ValueError` when **eps** is smaller than two grid spacings,
    :exc:`.exceptions.InterfaceVanishedError` when no point qualifies and
    :exc:`.exceptions.WindowTooSmallError` when the band reaches the faces
    of the grid box.

    :param field:
        :class:`ScalarField` holding a signed distance.
    :param eps:
        Band half-width.

    """
    grid = field.grid
    if eps < 2 * grid.spacing:
        raise ValueError(
            'Band half-width {0} is below two grid spacings ({1}).'.format(
                eps, 2 * grid.spacing))
    inside = np.abs(field.values) < eps
    indices = np.flatnonzero(inside)
    if not len(indices):
        raise exceptions.InterfaceVanishedError('interface vanished')
    if np.any(inside & grid.boundary_mask()):
        raise exceptions.WindowTooSmallError(
            'window too small: the narrow band touches the grid box')
    return NarrowBand(grid, eps, indices)


def write_snapshot(path, field, time=0.0, **metadata):
    """Write **field** to **path** in the snapshot format.

    :param path:
        Output file path.
    :param field:
        :class:`ScalarField` to store.
    :param time:
        Simulation time written to the header.
    :param metadata:
        Extra ``key value`` header lines; values are converted with
        :func:`str` and must not contain newlines.

    """
    grid = field.grid
    lines = [
        SNAPSHOT_MAGIC,
        'dim {0}'.format(grid.dim),
        'extents {0}'.format(' '.join(str(n) for n in grid.extents)),
        'origin {0}'.format(' '.join(repr(float(x)) for x in grid.origin)),
        'spacing {0!r}'.format(grid.spacing),
        'time {0!r}'.format(float(time)),
    ]
    for key in sorted(metadata):
        if key in _RESERVED_KEYS or key == 'end':
            raise ValueError('Reserved snapshot key: {0!r}'.format(key))
        lines.append('{0} {1}'.format(key, metadata[key]))
    lines.append('end')
    header = ('\n'.join(lines) + '\n').encode('ascii')
    with open(path, 'wb') as buf:
        buf.write(header)
        buf.write(np.ascontiguousarray(field.values, dtype='<f8').tobytes())


def read_snapshot(path):
    """Read a snapshot file.

    Return a tuple ``(field, time, metadata)`` where **metadata** maps the
    extra header keys to their string values.

    Raise :exc:`.exceptions.SnapshotFormatError` on malformed files.

    """
    with open(path, 'rb') as buf:
        content = buf.read()
    try:
        header, payload = _split_header(content)
        grid, time, metadata = _parse_header(header)
    except (ValueError, KeyError) as exc:
        raise exceptions.SnapshotFormatError(
            'Malformed snapshot {0!r}: {1}'.format(path, exc))
    values = np.frombuffer(payload, dtype='<f8')
    if values.size != grid.size:
        raise exceptions.SnapshotFormatError(
            'Snapshot {0!r} holds {1} values, expected {2}'.format(
                path, values.size, grid.size))
    return ScalarField(grid, values), time, metadata


def _split_header(content):
    marker = b'\nend\n'
    position = content.find(marker)
    if position < 0:
        raise ValueError('missing header terminator')
    header = content[:position].decode('ascii').split('\n')
    return header, content[position + len(marker):]


def _parse_header(header):
    if header[0] != SNAPSHOT_MAGIC:
        raise ValueError('unknown magic line {0!r}'.format(header[0]))
    entries = {}
    for line in header[1:]:
        key, __, value = line.partition(' ')
        entries[key] = value
    dim = int(entries.pop('dim'))
    extents = [int(n) for n in entries.pop('extents').split()]
    origin = [float(x) for x in entries.pop('origin').split()]
    if len(extents) != dim or len(origin) != dim:
        raise ValueError('dimension mismatch in header')
    grid = Grid(origin, float(entries.pop('spacing')), extents)
    time = float(entries.pop('time'))
    return grid, time, entries
