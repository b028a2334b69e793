"""Tests for :mod:`msibim.diagnostics`."""

import io
import math

import numpy as np
import pytest

from msibim import diagnostics
from msibim import dynamics
from msibim import shapes
from . import utils


def _record(time, volume=1.0, pieces=1, area=2.0):
    return diagnostics.Record(time, volume, area, 1, pieces)


def _series(volumes, pieces):
    return diagnostics.TimeSeries(
        _record(0.1 * number, volume, count)
        for number, (volume, count) in enumerate(zip(volumes, pieces)))


class TestTimeSeries(object):

    """Tests for :class:`msibim.diagnostics.TimeSeries`."""

    def test_times_must_increase(self):
        series = diagnostics.TimeSeries([_record(0.0), _record(0.5)])
        with pytest.raises(ValueError):
            series.append(_record(0.5))
        assert len(series) == 2

    def test_entries_must_be_finite(self):
        with pytest.raises(ValueError):
            diagnostics.TimeSeries([_record(0.0, volume=float('nan'))])

    def test_appended_leaves_the_original(self):
        series = diagnostics.TimeSeries([_record(0.0)])
        longer = series.appended(_record(1.0))
        assert (len(series), len(longer)) == (1, 2)
        assert longer.column('time').tolist() == [0.0, 1.0]

    def test_csv(self):
        series = diagnostics.TimeSeries([_record(0.0), _record(0.1, 0.9)])
        stream = io.StringIO()
        series.write_csv(stream)
        lines = stream.getvalue().splitlines()
        assert lines[0] == ','.join(diagnostics.COLUMNS)
        assert lines[2].startswith('0.1,0.9,2.0,1,1,')
        assert series.to_csv() == stream.getvalue()


class TestVolumes(object):

    """Tests for the volume and area monitors."""

    def test_smoothed_heaviside(self):
        values = diagnostics.smoothed_heaviside([-1.0, -0.1, 0.0, 0.1, 1.0],
                                                0.1)
        assert values.tolist() == pytest.approx([0.0, 0.0, 0.5, 1.0, 1.0])

    def test_disk(self):
        h = 4.0 / 256
        d = utils.exact_distance(utils.box_grid(h),
                                 shapes.Circle([0, 0], 1.0))
        record = diagnostics.measure(dynamics.SimState(d), 6 * h)
        assert abs(record.volume - math.pi) < 1e-2
        assert abs(record.area - 2 * math.pi) < 1e-2
        assert (record.components, record.pieces) == (1, 1)

    def test_ball(self):
        h = 4.0 / 64
        d = utils.exact_distance(utils.box_grid(h, dim=3),
                                 shapes.Sphere([0, 0, 0], 1.0))
        record = diagnostics.measure(dynamics.SimState(d), 6 * h)
        assert record.volume == pytest.approx(4 * math.pi / 3, rel=2e-2)
        assert record.area == pytest.approx(4 * math.pi, rel=2e-2)

    def test_merging_ellipses_initial_area(self):
        h = 4.0 / 512
        left = shapes.Ellipse([-0.62, 0], 0.55, 0.78)
        right = shapes.Ellipse([0.62, 0], 0.55, 0.78)
        d = shapes.initial_distance(utils.box_grid(h), [left, right])
        assert abs(diagnostics.enclosed_volume(d) - 2.6955) < 1e-2

    def test_component_volumes(self):
        h = 4.0 / 128
        d = utils.exact_distance(utils.box_grid(h),
                                 shapes.Circle([-0.8, 0], 0.5),
                                 shapes.Circle([0.7, 0.3], 0.6))
        report = dynamics.analyze(d, 6 * h).report
        volumes = diagnostics.component_volumes(d, report)
        assert sorted(volumes) == [1, 2]
        assert volumes[1] == pytest.approx(math.pi * 0.25, rel=2e-2)
        assert volumes[2] == pytest.approx(math.pi * 0.36, rel=2e-2)

    def test_measure_records_component_volumes(self):
        h = 4.0 / 128
        d = utils.exact_distance(utils.box_grid(h),
                                 shapes.Circle([-0.8, 0], 0.5),
                                 shapes.Circle([0.7, 0.3], 0.6))
        record = diagnostics.measure(dynamics.SimState(d), 6 * h)
        assert sorted(record.volumes) == [1, 2]
        assert sum(record.volumes.values()) == pytest.approx(record.volume)


class TestVolumeTrends(object):

    """Tests for :func:`msibim.diagnostics.volume_trends`."""

    def _series(self, *volumes):
        return diagnostics.TimeSeries(
            diagnostics.Record(0.1 * number, 1.0, 1.0, 2, 2, volumes=value)
            for number, value in enumerate(volumes))

    def test_trends(self):
        series = self._series({1: 0.8, 2: 2.0}, {1: 0.7, 2: 2.1},
                              {1: 0.6, 2: 2.2, 3: 0.1})
        table = diagnostics.volume_trends(series)
        assert table.column('Component') == [1, 2]
        assert table.column('Trend') == ['shrinks', 'grows']
        assert table.column('Change') == pytest.approx([-0.2, 0.2])

    def test_vanished_component_is_left_out(self):
        table = diagnostics.volume_trends(self._series({1: 0.5}, {}))
        assert len(table) == 0
        assert 'no component lasts' in table.to_ascii()

    def test_volumes_csv(self):
        series = self._series({2: 2.0, 1: 0.5}, {1: 0.25})
        stream = io.StringIO()
        series.write_volumes_csv(stream)
        assert stream.getvalue().splitlines() == [
            'time,label,volume', '0.0,1,0.5', '0.0,2,2.0', '0.1,1,0.25']


class TestMergingReport(object):

    """Tests for :func:`msibim.diagnostics.merging_report`."""

    def test_detect_merges(self):
        events = diagnostics.detect_merges(_series([1, 1, 1, 1],
                                                   [2, 2, 1, 1]))
        assert len(events) == 1
        assert (events[0].index, events[0].before, events[0].after) == (
            2, 2, 1)

    def test_table(self):
        series = _series([2.0, 1.9, 1.8, 1.7, 1.6], [2, 2, 1, 1, 1])
        table = diagnostics.merging_report(series, settle_steps=2)
        assert len(table) == 1
        start, end, jump, error = table.rows[0]
        assert (start, end) == (1.9, 1.6)
        assert jump == pytest.approx(-0.3)
        assert error == pytest.approx(0.15)

    def test_settle_past_the_end(self):
        series = _series([2.0, 1.9, 1.8], [2, 1, 1])
        table = diagnostics.merging_report(series, settle_steps=20)
        assert table.column('End Merge Area') == [1.8]

    def test_no_merge(self):
        table = diagnostics.merging_report(_series([1, 1], [2, 2]))
        assert len(table) == 0
        assert 'no merge detected' in table.to_ascii()
        assert table.to_csv().strip() == ','.join(diagnostics.MERGE_COLUMNS)


class TestConvergenceTable(object):

    """Tests for :func:`msibim.diagnostics.convergence_table`."""

    def test_second_order(self):
        table = diagnostics.convergence_table([0.1, 0.05, 0.025],
                                              [4e-2, 1e-2, 2.5e-3])
        assert table.column('order')[0] == '-'
        assert table.column('order')[1:] == pytest.approx([2.0, 2.0])

    def test_constant_error(self):
        table = diagnostics.convergence_table([0.1, 0.05], [1e-3, 1e-3])
        assert table.column('order')[1] == pytest.approx(0.0)

    def test_needs_two_resolutions(self):
        with pytest.raises(ValueError):
            diagnostics.convergence_table([0.1], [1e-3])

    def test_ascii(self):
        table = diagnostics.convergence_table([0.1, 0.05], [4e-2, 1e-2])
        lines = table.to_ascii().splitlines()
        assert lines[0].split() == ['h', 'error', 'order']
        assert lines[3].split() == ['0.05', '0.01', '2']
