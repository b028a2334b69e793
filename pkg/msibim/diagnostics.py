"""Conservation monitors, merge detection and convergence tables."""

import csv
import io
import math

import numpy as np
import scipy.ndimage

from . import levelset


#: Half-width of the smoothed Heaviside, in grid spacings.
HEAVISIDE_WIDTH = 1.5

COLUMNS = ('time', 'volume', 'area', 'components', 'pieces', 'v_min',
           'v_max', 'residual')
VOLUME_COLUMNS = ('time', 'label', 'volume')


class Record(object):

    """Diagnostics of one state.

    :param time:
        Simulation time.
    :param volume:
        Area (2D) or volume (3D) of the solid.
    :param area:
        Length (2D) or area (3D) of the interface.
    :param components:
        Number of solid components.
    :param pieces:
        Number of boundary pieces.
    :param v_min:
        Smallest normal velocity of the step leading here.
    :param v_max:
        Largest normal velocity of the step leading here.
    :param residual:
        Largest linear solver residual of that step.
    :param volumes:
        Optional mapping of solid component labels to their volumes.

    """

    def __init__(self, time, volume, area, components, pieces, v_min=0.0,
                 v_max=0.0, residual=0.0, volumes=None):
        self.time = float(time)
        self.volume = float(volume)
        self.area = float(area)
        self.components = int(components)
        self.pieces = int(pieces)
        self.v_min = float(v_min)
        self.v_max = float(v_max)
        self.residual = float(residual)
        self.volumes = dict(
            (int(label), float(value))
            for label, value in (volumes or {}).items())

    def row(self):
        return [getattr(self, column) for column in COLUMNS]

    def __repr__(self):
        return 'Record(time={0!r}, volume={1!r}, area={2!r})'.format(
            self.time, self.volume, self.area)


class TimeSeries(object):

    """Append-only sequence of :class:`Record` with increasing times."""

    def __init__(self, records=()):
        self.records = []
        for record in records:
            self.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]

    def append(self, record):
        """Add **record**.

        Raise :exc:`ValueError` if its time does not follow the last one or
        an entry is not finite.

        """
        if not all(math.isfinite(value) for value in record.row()):
            raise ValueError('Non-finite diagnostics entry: {0!r}'.format(
                record))
        if self.records and record.time <= self.records[-1].time:
            raise ValueError(
                'Record times must increase: {0} after {1}'.format(
                    record.time, self.records[-1].time))
        self.records.append(record)

    def appended(self, record):
        """Return a new series with **record** added."""
        series = TimeSeries()
        series.records = list(self.records)
        series.append(record)
        return series

    def column(self, name):
        return np.array([getattr(record, name) for record in self.records])

    def write_csv(self, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(COLUMNS)
        for record in self.records:
            writer.writerow([repr(value) for value in record.row()])

    def to_csv(self):
        stream = io.StringIO()
        self.write_csv(stream)
        return stream.getvalue()

    def write_volumes_csv(self, stream):
        """Write one ``time,label,volume`` row per solid component and
        record."""
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(VOLUME_COLUMNS)
        for record in self.records:
            for label, volume in sorted(record.volumes.items()):
                writer.writerow([repr(record.time), label, repr(volume)])


def smoothed_heaviside(d, width):
    """``0`` below ``-width``, ``1`` above ``width``, and
    ``(1 + d/w + sin(pi d/w) / pi) / 2`` in between."""
    d = np.asarray(d, dtype=float)
    ratio = np.clip(d / width, -1.0, 1.0)
    return 0.5 * (1.0 + ratio + np.sin(np.pi * ratio) / np.pi)


def enclosed_volume(distance):
    """Area (2D) or volume (3D) of ``{d > 0}`` by the smoothed Heaviside."""
    grid = distance.grid
    heaviside = smoothed_heaviside(distance.values,
                                   HEAVISIDE_WIDTH * grid.spacing)
    return float(np.sum(heaviside) * grid.cell_volume)


def component_volumes(distance, report):
    """Volume of each solid component.

    The Heaviside of every component is summed over the component grown
    by the Heaviside width.

    Return a dict mapping solid labels to volumes.

    """
    grid = distance.grid
    heaviside = smoothed_heaviside(distance.values,
                                   HEAVISIDE_WIDTH * grid.spacing)
    reach = int(math.ceil(HEAVISIDE_WIDTH)) + 1
    volumes = {}
    for label, component in sorted(report.components.items()):
        if not component.solid:
            continue
        region = scipy.ndimage.binary_dilation(report.labels == label,
                                               iterations=reach)
        volumes[label] = float(np.sum(heaviside[region]) * grid.cell_volume)
    return volumes


def measure(state, eps, velocity=None, solutions=None):
    """Return the :class:`Record` of **state**.

    :param state:
        :class:`.dynamics.SimState`.
    :param eps:
        Band half-width used for the interface quadrature.
    :param velocity:
        Optional :class:`.dynamics.VelocityField` of the step leading to
        the state.
    :param solutions:
        Optional dict of :class:`.bie.BieSolution` of that step.

    """
    geometry = state.geometry(eps)
    area = levelset.surface_integral(geometry.bundle, geometry.weights)
    components = sum(1 for component in geometry.report.components.values()
                     if component.solid)
    v_min = v_max = residual = 0.0
    if velocity is not None and len(velocity):
        v_min = float(np.min(velocity.values))
        v_max = float(np.max(velocity.values))
    if solutions:
        residual = max(solution.residual for solution in solutions.values())
    return Record(state.time, enclosed_volume(state.distance), area,
                  components, geometry.report.piece_count, v_min, v_max,
                  residual,
                  volumes=component_volumes(state.distance, geometry.report))


class MergeEvent(object):

    """Drop of the piece count between records **index** - 1 and
    **index**."""

    def __init__(self, index, time, before, after):
        self.index = index
        self.time = time
        self.before = before
        self.after = after

    def __repr__(self):
        return 'MergeEvent(index={0}, pieces {1} -> {2})'.format(
            self.index, self.before, self.after)


def detect_merges(series):
    """Return a :class:`MergeEvent` per drop of the piece count."""
    events = []
    for index in range(1, len(series)):
        before, after = series[index - 1].pieces, series[index].pieces
        if after < before:
            events.append(MergeEvent(index, series[index].time, before,
                                     after))
    return events


class Table(object):

    """Named columns of numbers, printable as aligned text or CSV.

    :param columns:
        Column headers.
    :param rows:
        Rows of values, one per header.
    :param note:
        Text shown instead of rows when the table is empty.

    """

    def __init__(self, columns, rows=(), note=''):
        self.columns = list(columns)
        self.rows = [list(row) for row in rows]
        self.note = note

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        position = self.columns.index(name)
        return [row[position] for row in self.rows]

    def _cells(self):
        return [[_format(value) for value in row] for row in self.rows]

    def to_ascii(self):
        cells = self._cells()
        widths = [max([len(header)] + [len(row[i]) for row in cells])
                  for i, header in enumerate(self.columns)]
        lines = ['  '.join(header.rjust(width)
                           for header, width in zip(self.columns, widths))]
        lines.append('  '.join('-' * width for width in widths))
        for row in cells:
            lines.append('  '.join(cell.rjust(width)
                                   for cell, width in zip(row, widths)))
        if not cells and self.note:
            lines.append(self.note)
        return '\n'.join(lines) + '\n'

    def to_csv(self):
        stream = io.StringIO()
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(self.columns)
        writer.writerows(self._cells())
        return stream.getvalue()


def _format(value):
    if isinstance(value, float):
        return '{0:.6g}'.format(value)
    return str(value)


MERGE_COLUMNS = ('Start Merge Area', 'End Merge Area', 'Area Jump',
                 'Relative Area Error')


def merging_report(series, events=None, settle_steps=20):
    """Area change across each merge.

    The start area is the volume of the record before the piece count
    drops, the end area the volume **settle_steps** records later (or the
    last record).  The relative error is the jump over the initial volume.

    Return a :class:`Table`, empty with a note when nothing merged.

    """
    if events is None:
        events = detect_merges(series)
    if not events:
        return Table(MERGE_COLUMNS, note='no merge detected')
    initial = series[0].volume
    rows = []
    for event in events:
        start = series[event.index - 1].volume
        end = series[min(event.index + settle_steps, len(series) - 1)].volume
        jump = end - start
        rows.append([start, end, jump, abs(jump) / initial])
    return Table(MERGE_COLUMNS, rows)


TREND_COLUMNS = ('Component', 'Start Volume', 'End Volume', 'Change',
                 'Trend')


def volume_trends(series):
    """Volume change of every solid component present in the first and the
    last record.

    Return a :class:`Table`, empty with a note when no component lasts
    through the series.

    """
    if not len(series):
        return Table(TREND_COLUMNS, note='no records')
    first, last = series[0].volumes, series[-1].volumes
    rows = []
    for label in sorted(set(first) & set(last)):
        change = last[label] - first[label]
        if change > 0:
            trend = 'grows'
        elif change < 0:
            trend = 'shrinks'
        else:
            trend = 'steady'
        rows.append([label, first[label], last[label], change, trend])
    return Table(TREND_COLUMNS, rows,
                 note='no component lasts through the run')


def convergence_table(spacings, errors):
    """Observed orders ``log2(e_coarse / e_fine) / log2(h_coarse / h_fine)``
    between consecutive resolutions.

    Raise :exc:`ValueError` with fewer than two resolutions.

    """
    if len(spacings) != len(errors):
        raise ValueError('Need one error per grid spacing.')
    if len(spacings) < 2:
        raise ValueError('Need at least two resolutions.')
    pairs = sorted(zip(spacings, errors), reverse=True)
    rows = [[pairs[0][0], pairs[0][1], '-']]
    for (h_coarse, e_coarse), (h_fine, e_fine) in zip(pairs, pairs[1:]):
        order = math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)
        rows.append([h_fine, e_fine, order])
    return Table(('h', 'error', 'order'), rows)
