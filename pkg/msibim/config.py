"""Reading run configurations.

A run configuration is an INI document with a ``[run]`` section of scalar
options and a ``[shapes]`` section with one initial shape per key:

.. code-block:: ini

    [run]
    dim = 2
    box = -2 2 -2 2
    h = 0.03125
    final_time = 0.5

    [shapes]
    left = ellipse -0.62 0 0.55 0.78
    right = ellipse 0.62 0 0.55 0.78

A ``preset`` option starts from an entry of :data:`PRESETS`; options given
in the document override the preset.

"""

import configparser
import os

from . import exceptions
from . import grid as gridmod
from . import shapes as shapemod
from .dynamics import CLAMP_MODES


def _floats(value):
    return tuple(float(item) for item in value.split())


def _optional_int(value):
    if value.strip().lower() in ('', 'none'):
        return None
    return int(value)


#: Options of the ``[run]`` section: converter and default.  ``None``
#: defaults mark required options.
RUN_OPTIONS = {
    'dim': (int, None),
    'box': (_floats, None),
    'h': (float, None),
    'eps_ratio': (float, 6.0),
    'cfl': (float, 0.5),
    'v_clamp': (float, 10.0),
    'clamp_mode': (str, 'magnitude'),
    'far_field': (float, 0.0),
    'final_time': (float, 1.0),
    'max_steps': (_optional_int, 'none'),
    'snapshot_every': (int, 0),
    'preset': (str, ''),
    'output': (str, 'msibim-output'),
    'seed': (int, 0),
    'settle_steps': (int, 20),
    'solver_tol': (float, 1e-8),
    'dense_limit': (int, 4000),
}


def _two_spheres(far_field):
    return {
        'run': {'dim': '3', 'box': '-2.5 2.5 -2.5 2.5 -2.5 2.5', 'h': '0.1',
                'eps_ratio': '3', 'far_field': far_field,
                'final_time': '0.05'},
        'shapes': {'small': 'sphere -0.9 0 0 0.5',
                   'large': 'sphere 0.7 0 0 0.8'},
    }


#: Experiment presets.  Geometric parameters are choices: the merging
#: ellipses have a total initial area of 2.6955.
PRESETS = {
    'stationary-circle': {
        'run': {'dim': '2', 'box': '-2 2 -2 2', 'h': '0.03125',
                'final_time': '10', 'max_steps': '200'},
        'shapes': {'circle': 'circle 0 0 1'},
    },
    'equal-circles': {
        'run': {'dim': '2', 'box': '-2 2 -2 2', 'h': '0.03125',
                'final_time': '10', 'max_steps': '200'},
        'shapes': {'left': 'circle -0.8 0 0.5',
                   'right': 'circle 0.8 0 0.5'},
    },
    'ellipse-conservation': {
        'run': {'dim': '2', 'box': '-2 2 -2 2', 'h': '0.03125',
                'final_time': '0.5'},
        'shapes': {'ellipse': 'ellipse 0 0 1.2 0.6'},
    },
    'thin-tube': {
        'run': {'dim': '2', 'box': '-2 2 -2 2', 'h': '0.03125',
                'final_time': '0.2'},
        'shapes': {'tube': 'tube -1.2 0 1.2 0 0.2'},
    },
    'merging-ellipses': {
        'run': {'dim': '2', 'box': '-2 2 -2 2', 'h': '0.03125',
                'final_time': '0.3'},
        'shapes': {'left': 'ellipse -0.62 0 0.55 0.78',
                   'right': 'ellipse 0.62 0 0.55 0.78'},
    },
    # Spheres of radius r are in equilibrium at far_field = -2/r: -4 and
    # -2.5 here.  Below both values both grow, above both they shrink, in
    # between the large one grows and the small one shrinks.
    'two-spheres-cold': _two_spheres('-6'),
    'two-spheres-farfield': _two_spheres('-3.076923'),
    'two-spheres-hot': _two_spheres('-1'),
    # A sphere is unstable to the fourth harmonic beyond 16 times its
    # equilibrium radius, 0.025 at this far field.
    'dendrite-seed': {
        'run': {'dim': '3', 'box': '-2.5 2.5 -2.5 2.5 -2.5 2.5',
                'h': '0.125', 'eps_ratio': '3', 'far_field': '-80',
                'v_clamp': '200', 'final_time': '1', 'max_steps': '20'},
        'shapes': {'seed': 'star 0 0 0 0.6 0.1'},
    },
}


class RunConfig(object):

    """Validated options of one run.

    Keyword arguments follow :data:`RUN_OPTIONS`; **shapes** is a list of
    :class:`.shapes.Shape`.  Use :func:`parse_config` to build one from a
    document.

    :param threads:
        Worker threads for concurrent solves; defaults to the
        ``MSIBIM_THREADS`` environment variable, or 1.

    """

    def __init__(self, dim, box, h, shapes, eps_ratio=6.0, cfl=0.5,
                 v_clamp=10.0, clamp_mode='magnitude', far_field=0.0,
                 final_time=1.0, max_steps=None, snapshot_every=0, preset='',
                 output='msibim-output', seed=0, settle_steps=20,
                 solver_tol=1e-8, dense_limit=4000, threads=None):
        self.dim = dim
        self.box = tuple(box)
        self.h = h
        self.shapes = list(shapes)
        self.eps_ratio = eps_ratio
        self.cfl = cfl
        self.v_clamp = v_clamp
        self.clamp_mode = clamp_mode
        self.far_field = far_field
        self.final_time = final_time
        self.max_steps = max_steps
        self.snapshot_every = snapshot_every
        self.preset = preset
        self.output = output
        self.seed = seed
        self.settle_steps = settle_steps
        self.solver_tol = solver_tol
        self.dense_limit = dense_limit
        if threads is None:
            threads = _threads_from_environment()
        self.threads = threads
        violations = self.violations()
        if violations:
            raise exceptions.ConfigError(violations)

    @property
    def eps(self):
        return self.eps_ratio * self.h

    @property
    def lower(self):
        return self.box[0::2]

    @property
    def upper(self):
        return self.box[1::2]

    def grid(self):
        """Return the :class:`.grid.Grid` covering :attr:`box`."""
        return gridmod.Grid.from_box(self.lower, self.upper, self.h)

    def violations(self):
        """Return a list of messages, one per invalid option."""
        found = []
        if self.dim not in (2, 3):
            found.append('dim: must be 2 or 3, got {0}'.format(self.dim))
            return found
        if len(self.box) != 2 * self.dim:
            found.append('box: needs {0} numbers, got {1}'.format(
                2 * self.dim, len(self.box)))
        elif any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            found.append('box: upper bounds must exceed lower bounds')
        positive = ('h', 'eps_ratio', 'cfl', 'final_time', 'solver_tol')
        for name in positive:
            if not getattr(self, name) > 0:
                found.append('{0}: must be positive, got {1}'.format(
                    name, getattr(self, name)))
        if self.eps_ratio < 2:
            found.append('eps_ratio: must be at least 2')
        if self.cfl > 1:
            found.append('cfl: must not exceed 1')
        if self.clamp_mode not in CLAMP_MODES:
            found.append('clamp_mode: must be one of {0}'.format(
                ', '.join(CLAMP_MODES)))
        elif self.clamp_mode == 'literal':
            if not self.v_clamp:
                found.append('v_clamp: must not be zero')
        elif not self.v_clamp > 0:
            found.append('v_clamp: must be positive, got {0}'.format(
                self.v_clamp))
        if self.dim == 2 and self.far_field:
            found.append('far_field: only used in 3D')
        for name in ('snapshot_every', 'settle_steps', 'dense_limit'):
            if getattr(self, name) < 0:
                found.append('{0}: must not be negative'.format(name))
        if self.max_steps is not None and self.max_steps < 1:
            found.append('max_steps: must be at least 1')
        if self.threads < 1:
            found.append('MSIBIM_THREADS: must be at least 1')
        if not self.shapes:
            found.append('shapes: at least one shape is required')
        if not found:
            found.extend(self._shape_violations())
        return found

    def _shape_violations(self):
        found = []
        margin = self.eps + 4 * self.h
        for number, shape in enumerate(self.shapes):
            lower, upper = shape.bounds()
            if len(lower) != self.dim:
                found.append('shapes: shape {0} is {1}D in a {2}D run'.format(
                    number + 1, len(lower), self.dim))
                continue
            if (any(l - margin < b for l, b in zip(lower, self.lower)) or
                    any(u + margin > b for u, b in zip(upper, self.upper))):
                found.append('shapes: shape {0} is closer than {1:.3g} to '
                             'the box'.format(number + 1, margin))
        return found

    def replace(self, **options):
        """Return a copy with **options** changed."""
        values = dict(self.__dict__)
        values.update(options)
        return RunConfig(**values)


def _threads_from_environment():
    try:
        return int(os.environ.get('MSIBIM_THREADS', '1'))
    except ValueError:
        return 0


class ConfigReader(object):

    """Reader for run configuration documents.

    :param config_parser:
        :class:`configparser.ConfigParser` instance with the document
        loaded.

    """

    SECTIONS = ('run', 'shapes')

    def __init__(self, config_parser):
        #: :class:`configparser.ConfigParser` instance to read.
        self.config = config_parser

    @classmethod
    def from_file(cls, path):
        """Read a config file and instantiate the ConfigReader.

        If the **path** doesn't exist, raise :exc:`.exceptions.ConfigError`.

        """
        if not os.path.exists(path):
            raise exceptions.ConfigError(
                ['config: file not found: {0!r}'.format(path)])
        with open(path) as buf:
            return cls.from_string(buf.read())

    @classmethod
    def from_string(cls, text):
        config = configparser.ConfigParser(interpolation=None)
        try:
            config.read_string(text)
        except configparser.Error as exc:
            raise exceptions.ConfigError(
                ['config: {0}'.format(exc)])
        return cls(config)

    def get_run_config(self, overrides=None, preset=None):
        """Build the :class:`RunConfig`.

        Raise :exc:`.exceptions.ConfigError` listing every problem found.

        :param overrides:
            Optional dict of already converted option values taking
            precedence over the document and the preset.
        :param preset:
            Optional preset name used when the document names none.

        """
        violations = []
        for section in self.config.sections():
            if section not in self.SECTIONS:
                violations.append('[{0}]: unknown section'.format(section))
        run = self._section('run')
        shapes = self._section('shapes')
        preset = run.get('preset', preset or '')
        if preset:
            if preset not in PRESETS:
                violations.append('preset: unknown preset {0!r}'.format(
                    preset))
            else:
                run = dict(PRESETS[preset]['run'], **run)
                if not shapes:
                    shapes = dict(PRESETS[preset]['shapes'])
        run['preset'] = preset

        options = self._convert(run, violations)
        overrides = overrides or {}
        for name, value in overrides.items():
            if value is not None:
                options[name] = value
        dim = options.get('dim')
        options['shapes'] = self._read_shapes(shapes, dim, violations)
        if violations:
            raise exceptions.ConfigError(violations)
        return RunConfig(**options)

    def _section(self, name):
        if not self.config.has_section(name):
            return {}
        return dict(self.config.items(name))

    def _convert(self, run, violations):
        options = {}
        for name in sorted(run):
            if name not in RUN_OPTIONS:
                violations.append('{0}: unknown option'.format(name))
        for name, (convert, default) in sorted(RUN_OPTIONS.items()):
            if name in run:
                raw = run[name]
            elif default is None:
                violations.append('{0}: required option missing'.format(name))
                continue
            else:
                raw = str(default)
            try:
                options[name] = convert(raw)
            except ValueError:
                violations.append('{0}: invalid value {1!r}'.format(
                    name, raw))
        return options

    def _read_shapes(self, shapes, dim, violations):
        found = []
        for key in sorted(shapes):
            try:
                found.append(parse_shape(shapes[key], dim))
            except (ValueError, exceptions.SnapshotFormatError,
                    IOError) as exc:
                violations.append('{0}: {1}'.format(key, exc))
        return found


_SHAPE_ARITY = {
    'circle': (2, (3,)),
    'sphere': (3, (4,)),
    'ellipse': (2, (4, 5)),
    'ellipsoid': (3, (6,)),
    'tube': (None, (5, 7)),
    'star': (None, (4, 5, 6)),
}


def parse_shape(value, dim=None):
    """Build a :class:`.shapes.Shape` from ``kind p1 p2 ...``.

    Raise :exc:`ValueError` on unknown kinds or wrong parameter counts.

    """
    parts = value.split()
    if not parts:
        raise ValueError('empty shape')
    kind, arguments = parts[0], parts[1:]
    if kind == 'file':
        if len(arguments) != 1:
            raise ValueError('file takes one path')
        return shapemod.FieldFile(arguments[0])
    if kind not in _SHAPE_ARITY:
        raise ValueError('unknown shape kind {0!r}'.format(kind))
    numbers = [float(item) for item in arguments]
    needed_dim, counts = _SHAPE_ARITY[kind]
    if len(numbers) not in counts:
        raise ValueError('{0} takes {1} numbers, got {2}'.format(
            kind, ' or '.join(str(count) for count in counts), len(numbers)))
    if needed_dim is not None and dim is not None and needed_dim != dim:
        raise ValueError('{0} needs a {1}D run'.format(kind, needed_dim))
    if kind == 'circle':
        return shapemod.Circle(numbers[:-1], numbers[-1])
    if kind == 'sphere':
        return shapemod.Sphere(numbers[:-1], numbers[-1])
    if kind == 'ellipse':
        return shapemod.Ellipse(numbers[:2], *numbers[2:])
    if kind == 'ellipsoid':
        return shapemod.Ellipsoid(numbers[:3], *numbers[3:])
    if kind == 'tube':
        size = 2 if len(numbers) == 5 else 3
        return shapemod.Tube(numbers[:size], numbers[size:2 * size],
                             numbers[-1])
    size = dim or 2
    return shapemod.Star(numbers[:size], *numbers[size:])


def parse_config(text, overrides=None, preset=None):
    """Parse a configuration document into a :class:`RunConfig`.

    Raise :exc:`.exceptions.ConfigError` listing every problem found.

    """
    return ConfigReader.from_string(text).get_run_config(
        overrides=overrides, preset=preset)


def load_config(path=None, overrides=None, preset=None):
    """Read **path**, or only the **preset** when no path is given."""
    if path is None:
        reader = ConfigReader.from_string('')
    else:
        reader = ConfigReader.from_file(path)
    return reader.get_run_config(overrides=overrides, preset=preset)
