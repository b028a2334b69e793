"""Longer runs of the experiment presets.

Deselected by default; run with ``pytest -m slow``.  Grids are the preset
ones or coarser.

"""

import numpy as np
import pytest

from msibim import config as configmod
from msibim import diagnostics
from msibim import dynamics
from msibim import shapes
from . import utils


pytestmark = pytest.mark.slow


def _initial_state(config):
    state = dynamics.SimState(
        shapes.initial_distance(config.grid(), config.shapes))
    state.series = state.series.appended(
        diagnostics.measure(state, config.eps))
    return state


def _run(config, steps):
    state = _initial_state(config)
    for __ in range(steps):
        state = dynamics.step(state, config)
    return state


def _perturbation(field):
    axis = utils.ray_radius(field, [0, 0, 0], [1, 0, 0])
    diagonal = utils.ray_radius(field, [0, 0, 0], [1, 1, 1])
    return axis - diagonal


def test_equal_circles_are_stationary():
    config = configmod.load_config(preset='equal-circles')
    state = _run(config, 200)
    h = config.h
    for center in ([-0.8, 0.0], [0.8, 0.0]):
        for direction in ([1, 0], [-1, 0], [0, 1], [0, -1]):
            radius = utils.ray_radius(state.distance, center, direction,
                                      length=1.0)
            assert abs(radius - 0.5) <= 2 * h


def test_ellipse_keeps_its_area_and_shortens():
    config = configmod.load_config(preset='ellipse-conservation')
    state = _run(config, 20)
    first, last = state.series[0], state.series[-1]
    assert abs(last.volume - first.volume) < 0.05 * first.volume
    assert last.area < first.area
    assert np.all(np.diff(state.series.column('area')) <= config.h)


def test_thin_tube_retracts():
    config = configmod.load_config(preset='thin-tube')
    state = _run(config, 15)
    first, last = state.series[0], state.series[-1]
    assert abs(last.volume - first.volume) < 0.05 * first.volume
    for sign in (1, -1):
        tip = utils.crossing_radius(state.distance, 0, sign)
        assert tip < 1.4 - config.h


def _merge(h):
    config = configmod.load_config(
        preset='merging-ellipses', overrides={'h': h, 'final_time': 1.0})
    state = _initial_state(config)
    merged_at = None
    while state.time < config.final_time:
        state = dynamics.step(state, config,
                              dt_max=config.final_time - state.time)
        if merged_at is None and diagnostics.detect_merges(state.series):
            merged_at = state.step
        if merged_at is not None and \
                state.step - merged_at >= config.settle_steps:
            break
    return diagnostics.merging_report(state.series,
                                      settle_steps=config.settle_steps)


def test_merging_ellipses_area_error():
    coarse = _merge(4.0 / 128)
    fine = _merge(4.0 / 256)
    assert len(coarse) == len(fine) == 1
    coarse_error = coarse.column('Relative Area Error')[0]
    fine_error = fine.column('Relative Area Error')[0]
    assert coarse_error <= 2 * 0.03988
    assert fine_error <= 2 * 0.01206
    assert coarse_error >= 3 * fine_error


@pytest.mark.parametrize('preset, trends', [
    ('two-spheres-cold', ['grows', 'grows']),
    ('two-spheres-hot', ['shrinks', 'shrinks']),
    ('two-spheres-farfield', ['shrinks', 'grows']),
])
def test_two_spheres_far_field_regimes(preset, trends):
    config = configmod.load_config(preset=preset)
    state = _run(config, 5)
    table = diagnostics.volume_trends(state.series)
    assert table.column('Component') == [1, 2]
    assert table.column('Trend') == trends


def test_dendrite_seed_amplifies_its_perturbation():
    config = configmod.load_config(preset='dendrite-seed')
    state = _initial_state(config)
    initial = _perturbation(state.distance)
    for __ in range(20):
        state = dynamics.step(state, config)
    assert state.series[-1].volume > state.series[0].volume
    assert state.series.column('v_min').min() < 0
    assert _perturbation(state.distance) > initial > 0
