#!/usr/bin/env python
r"""Commands for **msibim** program.

:func:`main` is installed as a console script during package setup.

Examples:

.. code-block:: bash

    $ msibim --preset stationary-circle --out runs/circle
    $ msibim --preset merging-ellipses --h 0.015625 --out runs/merge-256
    $ msibim --config run.ini --final-time 0.1 --snapshot-every 10
    $ MSIBIM_THREADS=4 msibim --preset two-spheres-farfield --far-field -5

"""

import argparse
import hashlib
import logging
import os
import sys

import msibim
from msibim import config as configmod
from msibim import diagnostics
from msibim import dynamics
from msibim import exceptions
from msibim import shapes


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def main(argv=None, stdout=None):
    """Run the :class:`Command`.

    Return the exit status.

    :param argv:
        A list of arguments to parse, defaults to :data:`sys.argv`.
    :param stdout:
        Standard output file, defaults to :data:`sys.stdout`.

    """
    options = parse_args(argv)
    logging.basicConfig(level=logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    command = Command(options, stdout=stdout)
    return command.run()


class Command(object):

    """Runs a simulation.

    The run configuration comes from the **config** file (``--config``),
    from a **preset** (``--preset``), or from both, the file overriding
    the preset.  ``--h``, ``--final-time``, ``--out``, ``--snapshot-every``,
    ``--far-field`` and ``--max-steps`` override both.

    Writes to the output directory:

    * ``series.csv`` -- one diagnostics record per step
    * ``snapshot-NNNNNN.msi`` -- the distance field every
      **snapshot_every** steps
    * ``final.msi`` -- the last distance field
    * ``volumes.csv`` -- the volume of every solid component per step
    * ``merging.csv`` and ``report.txt`` -- the merge table, the component
      volume trends and a summary

    :param options:
        Command arguments, :class:`argparse.Namespace` instance parsed by
        the :func:`parse_args`.
    :param stdout:
        Standard output file, defaults to :data:`sys.stdout`.

    """

    def __init__(self, options, stdout=None):
        self.options = options
        self.stdout = stdout or sys.stdout
        self._last_state = None

    def run(self):
        """Run the command and return the exit status.

        * Read and validate the configuration
        * Build the initial signed distance from the shapes
        * Step until the final time, the step cap, or until the interface
          vanishes
        * Write the series, snapshots and reports

        """
        try:
            config = self._load_config()
        except exceptions.ConfigError as exc:
            self._print('Invalid configuration:\n')
            for violation in exc.violations:
                self._print('  {0}\n'.format(violation))
            return EXIT_CONFIG
        os.makedirs(config.output, exist_ok=True)
        status = EXIT_OK
        try:
            state = self._initial_state(config)
            state = self._advance(state, config)
        except exceptions.InterfaceVanishedError as exc:
            self._print('Interface vanished at step {0}.\n'.format(
                exc.step or 0))
        except exceptions.SimulationError as exc:
            self._print('Failed at step {0}: {1}\n'.format(
                exc.step or 0, exc))
            status = EXIT_FAILURE
        else:
            self._print('Reached t={0:.6g} after {1} steps.\n'.format(
                state.time, state.step))
        finally:
            self._write_reports(config, self._last_state)
        return status

    def _load_config(self):
        overrides = {
            'h': self.options.h,
            'final_time': self.options.final_time,
            'output': self.options.out,
            'snapshot_every': self.options.snapshot_every,
            'far_field': self.options.far_field,
            'max_steps': self.options.max_steps,
        }
        return configmod.load_config(self.options.config, overrides=overrides,
                                     preset=self.options.preset)

    def _initial_state(self, config):
        grid = config.grid()
        distance = shapes.initial_distance(grid, config.shapes)
        state = dynamics.SimState(distance)
        state.series = state.series.appended(
            diagnostics.measure(state, config.eps))
        self._last_state = state
        self._print('Grid {0}, band half-width {1:.4g}\n'.format(
            grid.extents, config.eps))
        return state

    def _advance(self, state, config):
        while not self._finished(state, config):
            state = dynamics.step(state, config,
                                  dt_max=config.final_time - state.time)
            self._last_state = state
            record = state.series[-1]
            self._print('step {0:5d}  t={1:.6g}  V={2:.6g}  A={3:.6g}  '
                        'pieces={4}\n'.format(state.step, record.time,
                                              record.volume, record.area,
                                              record.pieces))
            if config.snapshot_every and \
                    state.step % config.snapshot_every == 0:
                self._snapshot(state, config, 'snapshot-{0:06d}.msi'.format(
                    state.step))
        return state

    def _finished(self, state, config):
        if config.max_steps is not None and state.step >= config.max_steps:
            return True
        return state.time >= config.final_time * (1.0 - 1e-12)

    def _snapshot(self, state, config, name):
        state.checkpoint(os.path.join(config.output, name),
                         config=config_digest(config))

    def _write_reports(self, config, state):
        if state is None:
            return
        self._snapshot(state, config, 'final.msi')
        with open(os.path.join(config.output, 'series.csv'), 'w') as buf:
            state.series.write_csv(buf)
        table = diagnostics.merging_report(state.series,
                                           settle_steps=config.settle_steps)
        with open(os.path.join(config.output, 'merging.csv'), 'w') as buf:
            buf.write(table.to_csv())
        first, last = state.series[0], state.series[-1]
        with open(os.path.join(config.output, 'report.txt'), 'w') as buf:
            buf.write('steps {0}\n'.format(state.step))
            buf.write('time {0!r}\n'.format(last.time))
            buf.write('volume {0!r} -> {1!r}\n'.format(first.volume,
                                                        last.volume))
            buf.write('area {0!r} -> {1!r}\n'.format(first.area, last.area))
            buf.write('\n')
            buf.write(table.to_ascii())
            buf.write('\n')
            buf.write(diagnostics.volume_trends(state.series).to_ascii())
        with open(os.path.join(config.output, 'volumes.csv'), 'w') as buf:
            state.series.write_volumes_csv(buf)

    def _print(self, message):
        if not self.options.quiet:
            self.stdout.write(message)


def config_digest(config):
    """Return a short hash of the options and shapes of **config**."""
    options = sorted((name, value) for name, value in vars(config).items()
                     if name not in ('shapes', 'output', 'threads'))
    bounds = [(shape.kind, [list(corner) for corner in shape.bounds()])
              for shape in config.shapes]
    text = repr((options, bounds)).encode('utf-8')
    return hashlib.sha1(text).hexdigest()[:12]


def parse_args(argv):
    """Parse arguments for the command.

    Return a :class:`argparse.Namespace` instance.

    :param argv:
        A list of arguments to parse.

    """
    description = 'Run a Mullins-Sekerka interface simulation.'
    parser = argparse.ArgumentParser(prog='msibim', description=description)
    parser.add_argument(
        '--config',
        metavar='PATH',
        default=None,
        help='Run configuration file'
    )
    parser.add_argument(
        '--preset',
        metavar='NAME',
        choices=sorted(configmod.PRESETS),
        default=None,
        help='Experiment preset: {0}'.format(
            ', '.join(sorted(configmod.PRESETS)))
    )
    parser.add_argument(
        '--h',
        dest='h',
        type=float,
        default=None,
        help='Grid spacing'
    )
    parser.add_argument(
        '--final-time',
        dest='final_time',
        type=float,
        default=None,
        help='Time to stop at'
    )
    parser.add_argument(
        '--max-steps',
        dest='max_steps',
        type=int,
        default=None,
        help='Largest number of steps'
    )
    parser.add_argument(
        '--far-field',
        dest='far_field',
        type=float,
        default=None,
        help='Far-field value of u (3D)'
    )
    parser.add_argument(
        '--out',
        metavar='DIR',
        default=None,
        help='Output directory'
    )
    parser.add_argument(
        '--snapshot-every',
        dest='snapshot_every',
        metavar='N',
        type=int,
        default=None,
        help='Write the distance field every N steps'
    )
    parser.add_argument(
        '-q',
        '--quiet',
        action='store_true',
        default=False,
        help='Do not print progress'
    )
    parser.add_argument(
        '-v',
        '--version',
        action='version',
        version=msibim.__version__
    )

    options = parser.parse_args(argv)
    if options.config is None and options.preset is None:
        parser.error('one of --config or --preset is required')
    return options


if __name__ == '__main__':
    sys.exit(main())
