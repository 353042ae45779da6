#!/usr/bin/env python

# owcrun.py - configuration, parameter sweeps, and CSV output

"""
Experiments: read a configuration, sweep one parameter,
compute the metrics analytically or by Monte Carlo (or both),
and write CSV.

Configuration
-------------

Configuration files are INI text, read with :mod:`configparser`.
Key names carry their units::

  [optics]
  P_t_mW = 30
  eta = 0.8
  A_r_cm2 = 1
  R_r_A_per_W = 0.4
  T_s = 1
  zeta = 1.5
  Psi_deg = 90
  Phi_half_deg = 60
  N0_W_per_Hz = 1e-21
  B_kHz = 200

  [geometry]
  D_m = 4
  L_m = 3

  [protocol]
  U = 50
  p_a = 0.05
  capture = yes

  [fbl]
  n = 64
  R = 1/2
  dispersion = nearest_neighbor
  eps_th = 1e-3
  allow_short_blocklength = yes
  awgn_squared_gamma = no

  [sweep]
  param = p_a
  min = 0.01
  max = 0.5
  step = 0.01

  [run]
  task = metrics
  mode = both
  seed = 1
  n_slots = 1000000

What is shown for ``[optics]`` through ``[fbl]`` is the default
(:data:`DEFAULTS`), so an empty file describes the reference setup.
Numbers may be written as fractions (``1/3``).
A ``[sweep]`` may give ``values = 0.1 0.2 0.4`` instead of a range.
``[run] u_a_cap`` is the largest active count with its own SINR
distribution; probability above it is a warning,
or an error with ``strict_cap = yes``.
Without a ``[sweep]`` the run is the single point ``p_a``.

A file can be layered over a preset (:mod:`owcpresets`);
a ``[sweep]`` or ``[preset]`` section in a later layer replaces
the whole section of an earlier one,
while other sections are merged key by key.

Everything is checked when the file is loaded,
including the configuration at every sweep point;
errors name the offending key as ``section.key``.
"""

import argparse
import collections
import concurrent.futures
import configparser
import csv
import dataclasses
import fractions
import logging
import math
import sys

import numpy

import owc
import owcaloha
import owcfbl
import owcmc
import owcoptics
import owcpresets
import owcsinr
from owc import ConfigError, NumericError, ParseError, SweepError
from owc import UnknownKeyError

logger = logging.getLogger(__name__)


DEFAULTS = """
[optics]
P_t_mW = 30
eta = 0.8
A_r_cm2 = 1
R_r_A_per_W = 0.4
T_s = 1
zeta = 1.5
Psi_deg = 90
Phi_half_deg = 60
N0_W_per_Hz = 1e-21
B_kHz = 200

[geometry]
D_m = 4
L_m = 3

[protocol]
U = 50
p_a = 0.05
capture = yes

[fbl]
n = 64
R = 1/2
dispersion = nearest_neighbor
eps_th = 1e-3
allow_short_blocklength = yes
awgn_squared_gamma = no

[run]
task = metrics
mode = analytic
n_slots = 1000000
u_a_cap = 32
strict_cap = no
workers = 1
"""

# Points of the SINR grid in CDF output.
CDF_POINTS = 200

HEADER = ('sweep_param', 'sweep_value', 'mode', 'epsilon', 'throughput',
          'p_out', 'reliability', 'se_epsilon', 'se_throughput', 'se_p_out')
CDF_HEADER = ('u_a', 'gamma', 'analytic_cdf', 'empirical_cdf')

ResultRow = collections.namedtuple('ResultRow', HEADER)
CdfRow = collections.namedtuple('CdfRow', CDF_HEADER)


class OutputError(owc.Error):
    """Output cannot be written."""


def _number(text):
    try:
        return float(fractions.Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        return float(text)


def _integer(text):
    value = _number(text)
    if not value.is_integer():
        raise ValueError("not an integer: %r" % text)
    return int(value)


def _boolean(text):
    states = configparser.ConfigParser.BOOLEAN_STATES
    if text.strip().lower() not in states:
        raise ValueError("not a boolean: %r" % text)
    return states[text.strip().lower()]


def _text(text):
    return ' '.join(text.split())


def _integers(text):
    return tuple(_integer(t) for t in text.split())


def _numbers(text):
    return tuple(_number(t) for t in text.split())


def _mode(text):
    mode = text.strip().lower()
    mode = {'mc': 'montecarlo'}.get(mode, mode)
    if mode not in ('analytic', 'montecarlo', 'both'):
        raise ValueError(
            "must be analytic, montecarlo (or mc), or both, got %r" % text)
    return mode


def _task(text):
    task = text.strip().lower()
    if task not in ('metrics', 'sinr_cdf'):
        raise ValueError("must be metrics or sinr_cdf, got %r" % text)
    return task


SCHEMA = {
    'optics': {
        'P_t_mW': _number, 'eta': _number, 'A_r_cm2': _number,
        'R_r_A_per_W': _number, 'T_s': _number, 'zeta': _number,
        'Psi_deg': _number, 'Phi_half_deg': _number,
        'N0_W_per_Hz': _number, 'B_kHz': _number,
    },
    'geometry': {'D_m': _number, 'L_m': _number},
    'protocol': {'U': _integer, 'p_a': _number, 'capture': _boolean},
    'fbl': {
        'n': _integer, 'R': _number, 'dispersion': _text,
        'eps_th': _number, 'allow_short_blocklength': _boolean,
        'awgn_squared_gamma': _boolean,
    },
    'sweep': {
        'param': _text, 'min': _number, 'max': _number, 'step': _number,
        'values': _numbers,
    },
    'run': {
        'task': _task, 'mode': _mode, 'seed': _integer,
        'n_slots': _integer, 'u_a_cap': _integer,
        'strict_cap': _boolean, 'workers': _integer,
        'output': _text, 'u_a': _integers,
    },
    'preset': {'name': _text, 'description': _text, 'assumed': _text},
}

# Sections whose keys a sweep may vary, and whose keys are unique.
MODEL_SECTIONS = ('optics', 'geometry', 'protocol', 'fbl')
SYSTEM_SECTIONS = ('optics', 'geometry')
SWEEPABLE = tuple(
    key for section in MODEL_SECTIONS
    for key, parse in SCHEMA[section].items()
    if parse in (_number, _integer))
# Sections replaced whole by a later layer.
REPLACED = ('sweep', 'preset')

# Error paths of the model classes, as configuration keys.
FIELD_PATH = {
    'OpticalFrontend.P_t': 'optics.P_t_mW',
    'OpticalFrontend.eta': 'optics.eta',
    'OpticalFrontend.A_r': 'optics.A_r_cm2',
    'OpticalFrontend.R_r': 'optics.R_r_A_per_W',
    'OpticalFrontend.T_s': 'optics.T_s',
    'OpticalFrontend.zeta': 'optics.zeta',
    'OpticalFrontend.Psi': 'optics.Psi_deg',
    'OpticalFrontend.Phi_half': 'optics.Phi_half_deg',
    'OpticalFrontend.N0': 'optics.N0_W_per_Hz',
    'OpticalFrontend.B': 'optics.B_kHz',
    'CellGeometry.D': 'geometry.D_m',
    'CellGeometry.L': 'geometry.L_m',
}


@dataclasses.dataclass(frozen=True)
class Sweep:
    """One parameter `param` and its `values`, ascending."""

    param: str
    values: tuple


@dataclasses.dataclass(frozen=True, eq=False)
class Experiment:
    """
    A loaded, checked experiment.

    `parameters` maps every model key (``P_t_mW``, ``D_m``, ``p_a``, ...)
    to its value at the base point;
    :meth:`point` rebuilds the model objects with the sweep parameter set.
    """

    parameters: dict
    sweep: Sweep
    task: str = 'metrics'
    mode: str = 'analytic'
    seed: int = None
    n_slots: int = 1000000
    u_a_cap: int = owcsinr.DEFAULT_CAP
    strict_cap: bool = False
    workers: int = 1
    output: str = None
    u_a: tuple = ()
    preset: dict = dataclasses.field(default_factory=dict)

    @property
    def system_sweep(self):
        return any(self.sweep.param in SCHEMA[s] for s in SYSTEM_SECTIONS)

    def point(self, value=None):
        """
        ``(SystemConfig, ProtocolConfig, FblParams)`` with the sweep
        parameter at `value` (the base point if ``None``).
        """

        parameters = dict(self.parameters)
        if value is not None:
            parameters[self.sweep.param] = value
        return build_models(parameters)

    @property
    def modes(self):
        if self.mode == 'both':
            return ('analytic', 'montecarlo')
        return (self.mode,)


def _translate(error):
    """Restate a model class error with its configuration key."""

    head = error.args[0].rstrip(':') if error.args else ''
    if head in FIELD_PATH:
        return ConfigError(FIELD_PATH[head] + ':', *error.args[1:])
    return error


def build_models(p):
    """
    Model objects from the flat parameter dict `p`,
    converting configuration units to SI.
    """

    try:
        frontend = owcoptics.OpticalFrontend(
            P_t=p['P_t_mW'] * 1e-3,
            eta=p['eta'],
            A_r=p['A_r_cm2'] * 1e-4,
            R_r=p['R_r_A_per_W'],
            T_s=p['T_s'],
            zeta=p['zeta'],
            Psi=math.radians(p['Psi_deg']),
            Phi_half=math.radians(p['Phi_half_deg']),
            N0=p['N0_W_per_Hz'],
            B=p['B_kHz'] * 1e3)
        geometry = owcoptics.CellGeometry(D=p['D_m'], L=p['L_m'])
        system = owcoptics.SystemConfig(frontend, geometry)
    except ConfigError as e:
        raise _translate(e) from None
    protocol = owcaloha.ProtocolConfig(
        U=p['U'], p_a=p['p_a'], capture=p['capture'])
    fbl = owcfbl.FblParams(
        n=p['n'], R=p['R'], dispersion=p['dispersion'],
        eps_th=p['eps_th'], allow_short=p['allow_short_blocklength'],
        awgn_squared_gamma=p['awgn_squared_gamma'])
    if not fbl.eps_th <= 0.5:
        raise ConfigError(
            "fbl.eps_th:", "outage threshold needs eps_th <= 0.5")
    return system, protocol, fbl


def _read_layer(text, origin):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as e:
        raise ParseError("%s:" % origin, str(e)) from None
    layer = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise UnknownKeyError(
                "%s:" % section,
                "unknown section in %s; valid sections are %s"
                % (origin, ', '.join(SCHEMA)))
        layer[section] = {}
        for key in parser.options(section):
            if key not in SCHEMA[section]:
                raise UnknownKeyError(
                    "%s.%s:" % (section, key),
                    "unknown key in %s; valid keys are %s"
                    % (origin, ', '.join(SCHEMA[section])))
            layer[section][key] = parser.get(section, key)
    return layer


def _merge(layers):
    merged = {}
    for layer in layers:
        for section, items in layer.items():
            if section in REPLACED:
                merged[section] = dict(items)
            else:
                merged.setdefault(section, {}).update(items)
    parsed = {}
    for section, items in merged.items():
        parsed[section] = {}
        for key, text in items.items():
            try:
                parsed[section][key] = SCHEMA[section][key](text)
            except ValueError as e:
                raise ConfigError("%s.%s:" % (section, key), str(e)) from None
    return parsed


def _sweep(parsed, parameters):
    section = parsed.get('sweep', {})
    param = section.get('param')
    if param is None:
        if section:
            raise ConfigError("sweep.param:", "missing")
        return Sweep('p_a', (parameters['p_a'],))
    if param not in SWEEPABLE:
        raise UnknownKeyError(
            "sweep.param:",
            "unknown parameter %r; valid names are %s"
            % (param, ', '.join(SWEEPABLE)))
    if 'values' in section:
        values = section['values']
        if not values:
            raise ConfigError("sweep.values:", "empty")
    else:
        for key in ('min', 'max', 'step'):
            if key not in section:
                raise ConfigError(
                    "sweep.%s:" % key, "missing (or give sweep.values)")
        low, high, step = section['min'], section['max'], section['step']
        if not step > 0:
            raise ConfigError("sweep.step:", "must be > 0")
        if not high >= low:
            raise ConfigError("sweep.max:", "must be >= sweep.min")
        count = int(math.floor((high - low) / step + 1e-9)) + 1
        values = [float('%.12g' % (low + i * step)) for i in range(count)]
    values = sorted(set(values))
    if param in ('U', 'n'):
        if any(v != int(v) for v in values):
            raise ConfigError(
                "sweep.param:", "%s takes integer values" % param)
        values = [int(v) for v in values]
    return Sweep(param, tuple(values))


def load_config(path=None, preset=None, overrides=None):
    """
    Load and check an experiment.

    `path` is a configuration file (optional), `preset` a preset name
    from :mod:`owcpresets` under it,
    and `overrides` a dict of ``[run]`` keys
    (already parsed values) set from the command line.
    Returns an :class:`Experiment`.
    """

    layers = [_read_layer(DEFAULTS, '<defaults>')]
    if preset is not None:
        try:
            text = owcpresets.lookup(preset)
        except KeyError:
            raise UnknownKeyError(
                "preset:", "unknown preset %r; valid presets are %s"
                % (preset, ', '.join(owcpresets.names()))) from None
        layers.append(_read_layer(text, '<preset %s>' % preset))
    if path is not None:
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise ParseError("%s:" % path, e.strerror or str(e)) from None
        layers.append(_read_layer(text, path))
    parsed = _merge(layers)

    parameters = {}
    for section in MODEL_SECTIONS:
        parameters.update(parsed[section])
    run = dict(parsed['run'])
    for key, value in (overrides or {}).items():
        if value is not None:
            run[key] = value

    sweep = _sweep(parsed, parameters)
    experiment = Experiment(
        parameters=parameters,
        sweep=sweep,
        task=run['task'],
        mode=run['mode'],
        seed=run.get('seed'),
        n_slots=run['n_slots'],
        u_a_cap=run['u_a_cap'],
        strict_cap=run['strict_cap'],
        workers=run['workers'],
        output=run.get('output'),
        u_a=run.get('u_a', ()),
        preset=dict(parsed.get('preset', {})))
    _check(experiment)
    return experiment


def _check(experiment):
    if experiment.mode != 'analytic' and experiment.seed is None:
        raise ConfigError(
            "run.seed:", "required in %s mode" % experiment.mode)
    if experiment.seed is not None and not 0 <= experiment.seed < 2 ** 64:
        raise ConfigError("run.seed:", "must be a 64-bit unsigned integer")
    if experiment.n_slots < 1:
        raise ConfigError("run.n_slots:", "must be >= 1")
    if experiment.u_a_cap < 1:
        raise ConfigError("run.u_a_cap:", "must be >= 1")
    if experiment.workers < 1:
        raise ConfigError("run.workers:", "must be >= 1")
    if experiment.task == 'sinr_cdf':
        if not experiment.u_a or min(experiment.u_a) < 1:
            raise ConfigError(
                "run.u_a:", "sinr_cdf needs active counts >= 1")
    for value in experiment.sweep.values:
        try:
            experiment.point(value)
        except ConfigError as e:
            raise ConfigError(
                "at %s=%s:" % (experiment.sweep.param, value),
                *e.args) from None


def _analytic_point(system, protocol, fbl, cap, strict):
    stats = owcsinr.SinrStatistics(owcoptics.derive_constants(system), cap,
                                   strict=strict)
    return owcaloha.evaluate(protocol, fbl, stats)


def _report_row(experiment, value, mode, report):
    return ResultRow(experiment.sweep.param, value, mode, report.epsilon,
                     report.throughput, report.p_out, report.reliability,
                     report.se_epsilon, report.se_throughput, report.se_p_out)


def run_metrics(experiment):
    """ResultRow list for a ``metrics`` experiment, in sweep order."""

    sweep = experiment.sweep
    points = [experiment.point(v) for v in sweep.values]
    analytic = {}
    if 'analytic' in experiment.modes:
        if experiment.system_sweep and experiment.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(
                    experiment.workers) as pool:
                futures = [
                    pool.submit(_analytic_point, system, protocol, fbl,
                                experiment.u_a_cap, experiment.strict_cap)
                    for system, protocol, fbl in points]
                for value, future in zip(sweep.values, futures):
                    try:
                        analytic[value] = future.result()
                    except NumericError as e:
                        raise SweepError(sweep.param, value, e) from e
        else:
            stats = None
            for value, (system, protocol, fbl) in zip(
                    sweep.values, points):
                if stats is None or experiment.system_sweep:
                    stats = owcsinr.SinrStatistics(
                        owcoptics.derive_constants(system),
                        experiment.u_a_cap, strict=experiment.strict_cap)
                try:
                    analytic[value] = owcaloha.evaluate(protocol, fbl, stats)
                except NumericError as e:
                    raise SweepError(sweep.param, value, e) from e

    rows = []
    for value, (system, protocol, fbl) in zip(sweep.values, points):
        for mode in experiment.modes:
            if mode == 'analytic':
                report = analytic[value]
            else:
                try:
                    samples = owcmc.simulate(
                        owcoptics.derive_constants(system), protocol,
                        owcmc.SimConfig(experiment.n_slots,
                                        experiment.seed),
                        workers=experiment.workers)
                    report = owcmc.estimate_metrics(
                        samples, fbl, capture=protocol.capture)
                except NumericError as e:
                    raise SweepError(sweep.param, value, e) from e
            rows.append(_report_row(experiment, value, mode, report))
        logger.info("%s=%s done", sweep.param, value)
    return rows


def run_sinr_cdf(experiment):
    """
    CdfRow list for a ``sinr_cdf`` experiment:
    the SINR distribution of the reference user for each count in
    `experiment.u_a`, analytic and/or empirical, on a log-spaced grid.
    """

    system, protocol, fbl = experiment.point()
    constants = owcoptics.derive_constants(system)
    stats = owcsinr.SinrStatistics(
        constants, cap=max(experiment.u_a_cap, max(experiment.u_a)))
    rows = []
    for u_a in experiment.u_a:
        try:
            dist = stats.distribution(u_a)
        except NumericError as e:
            raise SweepError('u_a', u_a, e) from e
        lo, hi = dist.support
        grid = numpy.geomspace(lo, hi, CDF_POINTS)
        analytic = [None] * grid.size
        empirical = [None] * grid.size
        if 'analytic' in experiment.modes:
            analytic = dist.cdf(grid)
        if 'montecarlo' in experiment.modes:
            samples = owcmc.simulate(
                constants, protocol,
                owcmc.SimConfig(experiment.n_slots, experiment.seed,
                                u_a=u_a),
                workers=experiment.workers)
            empirical = owcmc.empirical_cdf(samples.sinr, grid)
        rows.extend(CdfRow(u_a, g, a, e)
                    for g, a, e in zip(grid, analytic, empirical))
    return rows


def run_experiment(experiment):
    """Run `experiment`; the row type depends on its task."""

    if experiment.task == 'sinr_cdf':
        return run_sinr_cdf(experiment)
    return run_metrics(experiment)


def _format(value):
    if value is None:
        return ''
    if isinstance(value, str):
        return value
    if isinstance(value, (int, numpy.integer)):
        return '%d' % value
    return '%.12g' % value


def _write(header, rows, path):
    if not rows:
        raise owc.DomainError("no rows to write")
    if path is None or path == '-':
        return _write_to(header, rows, sys.stdout)
    try:
        with open(path, 'w', newline='') as out:
            _write_to(header, rows, out)
    except OSError as e:
        raise OutputError("%s:" % path, e.strerror or str(e)) from None


def _write_to(header, rows, out):
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(v) for v in row])


def emit_csv(rows, path=None):
    """
    Write ResultRow `rows` as CSV to `path` (standard output if
    ``None`` or ``-``).
    Numbers have 12 significant digits; missing standard errors are
    empty fields.
    """

    _write(HEADER, rows, path)


def emit_cdf_csv(rows, path=None):
    """Write CdfRow `rows` as CSV, like :func:`emit_csv`."""

    _write(CDF_HEADER, rows, path)


def read_csv(path):
    """Read a file written by :func:`emit_csv` back as ResultRows."""

    def number(text):
        return float(text) if text != '' else None

    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = tuple(next(reader))
        if header != HEADER:
            raise ParseError("%s:" % path, "not a results file")
        return [ResultRow(r[0], float(r[1]), r[2],
                          *(number(t) for t in r[3:]))
                for r in reader]


def _configure_logging(verbose):
    level = max(logging.WARNING - 10 * verbose, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(name)s: %(levelname)s: %(message)s")
    logging.captureWarnings(True)


def main(argv=None):
    """The ``owcsa`` command."""

    parser = argparse.ArgumentParser(
        prog='owcsa',
        description="Slotted ALOHA with capture in an optical"
        " wireless IoT cell")
    sub = parser.add_subparsers(dest='command', required=True)
    run = sub.add_parser('run', help="run an experiment")
    run.add_argument('config', nargs='?', help="configuration file")
    run.add_argument('--preset', help="start from a preset")
    run.add_argument('--mode', type=_mode,
                     help="analytic, mc (montecarlo), or both")
    run.add_argument('--seed', type=int)
    run.add_argument('--out', help="output CSV file (default stdout)")
    run.add_argument('--show-preset', metavar='NAME',
                     help="print a preset and exit")
    run.add_argument('--validate-only', action='store_true',
                     help="check the configuration and exit")
    run.add_argument('--workers', type=int)
    run.add_argument('-v', '--verbose', action='count', default=0)
    sub.add_parser('presets', help="list the presets")

    args = parser.parse_args(argv)

    if args.command == 'presets':
        for name in owcpresets.names():
            print(name)
        return 0

    _configure_logging(args.verbose)

    if args.show_preset:
        try:
            text = owcpresets.lookup(args.show_preset)
        except KeyError:
            print("owcsa: no preset %r" % args.show_preset, file=sys.stderr)
            return 1
        sys.stdout.write(text.lstrip())
        return 0

    try:
        overrides = dict(mode=args.mode, seed=args.seed, output=args.out,
                         workers=args.workers)
        experiment = load_config(args.config, preset=args.preset,
                                 overrides=overrides)
    except ConfigError as e:
        print(e, file=sys.stderr)
        return 1
    if args.validate_only:
        print("%s: %d sweep points, ok" % (
            args.config or args.preset or '<defaults>',
            len(experiment.sweep.values)))
        return 0

    try:
        rows = run_experiment(experiment)
        if experiment.task == 'sinr_cdf':
            emit_cdf_csv(rows, experiment.output)
        else:
            emit_csv(rows, experiment.output)
    except NumericError as e:
        print(e, file=sys.stderr)
        return 2
    except OutputError as e:
        print(e, file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
