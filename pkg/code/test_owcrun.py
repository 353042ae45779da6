# Tests for owcrun (configuration, sweeps, CSV, the owcsa command)
# and owcpresets.

import contextlib
import io
import math
import os
import tempfile
import textwrap
import unittest
from unittest import mock

import owc
import owcaloha
import owcpresets
import owcrun
import owcsinr


class ConfigFile:
    """Write `text` to a temporary configuration file."""

    def __init__(self, text):
        self.text = textwrap.dedent(text)

    def __enter__(self):
        self.dir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.dir.name, 'run.cfg')
        with open(self.path, 'w') as f:
            f.write(self.text)
        return self.path

    def __exit__(self, *exc):
        self.dir.cleanup()


def load_text(text, **k):
    with ConfigFile(text) as path:
        return owcrun.load_config(path, **k)


def run_main(argv):
    """Run ``owcsa`` with `argv`; return (code, stdout, stderr)."""

    out = io.StringIO()
    err = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = owcrun.main(argv)
    return code, out.getvalue(), err.getvalue()


SMALL = """
    [protocol]
    U = 3

    [sweep]
    param = p_a
    values = 0.1 0.2

    [run]
    u_a_cap = 3
"""


class TestDefaults(unittest.TestCase):
    def test_empty_file(self):
        experiment = load_text("")
        self.assertEqual(experiment.sweep, owcrun.Sweep('p_a', (0.05,)))
        self.assertEqual(experiment.mode, 'analytic')
        self.assertEqual(experiment.task, 'metrics')
        system, protocol, fbl = experiment.point()
        self.assertAlmostEqual(system.frontend.P_t, 30e-3)
        self.assertAlmostEqual(system.frontend.A_r, 1e-4)
        self.assertAlmostEqual(system.frontend.B, 200e3)
        self.assertAlmostEqual(system.frontend.Phi_half, math.pi / 3)
        self.assertEqual(system.geometry.D, 4.0)
        self.assertEqual((protocol.U, protocol.p_a), (50, 0.05))
        self.assertEqual((fbl.n, fbl.R, fbl.eps_th), (64, 0.5, 1e-3))

    def test_no_file(self):
        experiment = owcrun.load_config()
        self.assertEqual(experiment.parameters['L_m'], 3.0)

    def test_fraction(self):
        experiment = load_text("""
            [fbl]
            R = 1/3
        """)
        self.assertEqual(experiment.parameters['R'], 1 / 3)


class TestConfigErrors(unittest.TestCase):
    def test_field_of_view_range(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [optics]
                Psi_deg = 100
            """)
        self.assertIn("optics.Psi_deg", str(cm.exception))

    def test_devices_outside_view(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [optics]
                Psi_deg = 45
            """)
        self.assertIn("field-of-view", str(cm.exception))

    def test_unknown_key(self):
        with self.assertRaises(owc.UnknownKeyError) as cm:
            load_text("""
                [protocol]
                pa = 0.1
            """)
        self.assertIn("protocol.pa", str(cm.exception))
        self.assertIn("p_a", str(cm.exception))

    def test_unknown_section(self):
        with self.assertRaises(owc.UnknownKeyError):
            load_text("""
                [radio]
                power = 1
            """)

    def test_malformed(self):
        with self.assertRaises(owc.ParseError):
            load_text("p_a = 0.1\n")

    def test_missing_file(self):
        with self.assertRaises(owc.ParseError):
            owcrun.load_config('/nonexistent/owcsa.cfg')

    def test_bad_value(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [protocol]
                U = many
            """)
        self.assertIn("protocol.U", str(cm.exception))
        with self.assertRaises(owc.ConfigError):
            load_text("""
                [protocol]
                U = 2.5
            """)

    def test_seed_required(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [run]
                mode = mc
            """)
        self.assertIn("run.seed", str(cm.exception))
        experiment = load_text("""
            [run]
            mode = mc
            seed = 7
        """)
        self.assertEqual(experiment.modes, ('montecarlo',))

    def test_short_block_refused(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [fbl]
                allow_short_blocklength = no
            """)
        self.assertIn("fbl.n", str(cm.exception))

    def test_outage_target(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [fbl]
                eps_th = 0.7
            """)
        self.assertIn("fbl.eps_th", str(cm.exception))

    def test_cdf_needs_counts(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [run]
                task = sinr_cdf
            """)
        self.assertIn("run.u_a", str(cm.exception))


class TestSweep(unittest.TestCase):
    def test_range(self):
        experiment = load_text("""
            [sweep]
            param = p_a
            min = 0.01
            max = 0.05
            step = 0.01
        """)
        self.assertEqual(experiment.sweep.values,
                         (0.01, 0.02, 0.03, 0.04, 0.05))

    def test_values(self):
        experiment = load_text("""
            [sweep]
            param = U
            values = 50 10 20 20
        """)
        self.assertEqual(experiment.sweep.values, (10, 20, 50))
        self.assertIsInstance(experiment.sweep.values[0], int)
        self.assertFalse(experiment.system_sweep)
        system, protocol, fbl = experiment.point(20)
        self.assertEqual(protocol.U, 20)

    def test_system_sweep(self):
        experiment = load_text("""
            [sweep]
            param = L_m
            values = 3 4
        """)
        self.assertTrue(experiment.system_sweep)
        system, protocol, fbl = experiment.point(4.0)
        self.assertEqual(system.geometry.L, 4.0)

    def test_integer_parameter(self):
        with self.assertRaises(owc.ConfigError):
            load_text("""
                [sweep]
                param = U
                values = 10 10.5
            """)

    def test_unknown_parameter(self):
        with self.assertRaises(owc.UnknownKeyError) as cm:
            load_text("""
                [sweep]
                param = pa
                values = 0.1
            """)
        self.assertIn("Phi_half_deg", str(cm.exception))

    def test_incomplete(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [sweep]
                param = p_a
                min = 0.1
                max = 0.2
            """)
        self.assertIn("sweep.step", str(cm.exception))

    def test_every_point_checked(self):
        with self.assertRaises(owc.ConfigError) as cm:
            load_text("""
                [sweep]
                param = p_a
                values = 0.1 1.5
            """)
        message = str(cm.exception)
        self.assertIn("at p_a=1.5", message)
        self.assertIn("protocol.p_a", message)


class TestPresets(unittest.TestCase):
    def test_all_load(self):
        for name in owcpresets.preset:
            experiment = owcrun.load_config(preset=name)
            self.assertEqual(experiment.preset['name'], name)
            self.assertIn('assumed', experiment.preset)

    def test_sinr_cdf(self):
        experiment = owcrun.load_config(preset='sinr-cdf')
        self.assertEqual(experiment.task, 'sinr_cdf')
        self.assertEqual(experiment.u_a, (2, 4, 8))
        self.assertEqual(experiment.modes, ('analytic', 'montecarlo'))

    def test_outage(self):
        experiment = owcrun.load_config(preset='outage-vs-activation')
        self.assertEqual(experiment.parameters['D_m'], 2.0)
        self.assertEqual(len(experiment.sweep.values), 50)
        self.assertEqual(experiment.sweep.values[-1], 0.5)

    def test_layering(self):
        experiment = load_text("""
            [protocol]
            p_a = 0.2

            [sweep]
            param = U
            values = 30 50
        """, preset='nocapture-narrow')
        self.assertEqual(experiment.sweep, owcrun.Sweep('U', (30, 50)))
        self.assertEqual(experiment.parameters['Phi_half_deg'], 30.0)
        self.assertEqual(experiment.parameters['p_a'], 0.2)
        self.assertFalse(experiment.parameters['capture'])

    def test_unknown(self):
        with self.assertRaises(owc.UnknownKeyError):
            owcrun.load_config(preset='no-such-preset')

    def test_numbered_names(self):
        for number in range(2, 10):
            self.assertIn('fig%d' % number, owcpresets.alias)
        experiment = owcrun.load_config(preset='fig2')
        self.assertEqual(experiment.task, 'sinr_cdf')
        self.assertEqual(experiment.u_a, (2, 4, 8))
        experiment = owcrun.load_config(preset='fig8-outage')
        self.assertEqual(experiment.preset['name'], 'outage-vs-activation')
        _, _, fbl = experiment.point()
        self.assertEqual((fbl.n, fbl.R, fbl.eps_th), (64, 0.5, 1e-3))

    def test_aliases_resolve(self):
        for name, target in owcpresets.alias.items():
            self.assertIn(target, owcpresets.preset)
            self.assertEqual(owcpresets.lookup(name),
                             owcpresets.preset[target])
        with self.assertRaises(KeyError):
            owcpresets.lookup('fig1')

    def test_capture_across_rate(self):
        with_capture = owcrun.load_config(preset='fig9-capture-rate')
        without = owcrun.load_config(preset='fig9-nocapture-rate')
        for experiment, capture in ((with_capture, True), (without, False)):
            self.assertEqual(experiment.parameters['capture'], capture)
            self.assertAlmostEqual(experiment.parameters['R'], 2 / 3)
            self.assertEqual(experiment.sweep.param, 'p_a')

    def test_repeatable(self):
        """The same preset and seed write the same bytes."""
        small = """
            [protocol]
            U = 5

            [sweep]
            param = p_a
            values = 0.05 0.2

            [run]
            mode = both
            seed = 9
            n_slots = 20000
            u_a_cap = 5
        """
        outputs = []
        with tempfile.TemporaryDirectory() as d, ConfigFile(small) as path:
            for i in range(2):
                out_path = os.path.join(d, 'out%d.csv' % i)
                code, out, err = run_main(
                    ['run', path, '--preset', 'throughput-low-rate',
                     '--out', out_path])
                self.assertEqual(code, 0, err)
                with open(out_path, 'rb') as f:
                    outputs.append(f.read())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(outputs[0].count(b'\n'), 5)

    def test_overrides(self):
        experiment = owcrun.load_config(
            preset='throughput-vs-activation',
            overrides=dict(mode='both', seed=5, output=None))
        self.assertEqual(experiment.mode, 'both')
        self.assertEqual(experiment.seed, 5)
        self.assertIsNone(experiment.output)


class TestRun(unittest.TestCase):
    def test_analytic(self):
        experiment = load_text(SMALL)
        rows = owcrun.run_experiment(experiment)
        self.assertEqual([r.sweep_value for r in rows], [0.1, 0.2])
        for row in rows:
            self.assertEqual(row.sweep_param, 'p_a')
            self.assertEqual(row.mode, 'analytic')
            self.assertIsNone(row.se_epsilon)
            self.assertAlmostEqual(row.reliability, 1 - row.p_out)
            protocol = owcaloha.ProtocolConfig(U=3, p_a=row.sweep_value)
            self.assertAlmostEqual(
                row.throughput,
                0.5 * (owcaloha.p_active(protocol) - row.epsilon),
                places=12)

    def test_both(self):
        experiment = load_text(SMALL + """
    n_slots = 5000
    mode = both
    seed = 1
""")
        rows = owcrun.run_experiment(experiment)
        self.assertEqual([(r.sweep_value, r.mode) for r in rows], [
            (0.1, 'analytic'), (0.1, 'montecarlo'),
            (0.2, 'analytic'), (0.2, 'montecarlo')])
        self.assertIsNotNone(rows[1].se_epsilon)
        again = owcrun.run_experiment(experiment)
        self.assertEqual(rows[1], again[1])

    def test_cap_warning(self):
        experiment = load_text(SMALL.replace("u_a_cap = 3", "u_a_cap = 1"))
        self.assertFalse(experiment.strict_cap)
        with self.assertWarns(owcsinr.CapWarning):
            rows = owcrun.run_experiment(experiment)
        self.assertEqual(len(rows), 2)

    def test_sinr_cdf(self):
        experiment = load_text("""
            [run]
            task = sinr_cdf
            u_a = 1 2
        """)
        rows = owcrun.run_experiment(experiment)
        self.assertEqual(len(rows), 2 * owcrun.CDF_POINTS)
        self.assertEqual({r.u_a for r in rows}, {1, 2})
        self.assertTrue(all(r.empirical_cdf is None for r in rows))
        single = [r.analytic_cdf for r in rows if r.u_a == 1]
        self.assertAlmostEqual(single[0], 0.0)
        self.assertAlmostEqual(single[-1], 1.0)
        self.assertEqual(single, sorted(single))


class TestCsv(unittest.TestCase):
    rows = [
        owcrun.ResultRow('p_a', 0.1, 'analytic', 0.01, 0.02, 0.5, 0.5,
                         None, None, None),
        owcrun.ResultRow('p_a', 0.1, 'montecarlo', 0.011, 0.021, 0.49, 0.51,
                         1e-4, 2e-4, 3e-4),
    ]

    def test_format(self):
        out = io.StringIO()
        with contextlib.redirect_stdout(out):
            owcrun.emit_csv(self.rows)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[0], ','.join(owcrun.HEADER))
        self.assertEqual(lines[1], 'p_a,0.1,analytic,0.01,0.02,0.5,0.5,,,')
        self.assertEqual(
            lines[2],
            'p_a,0.1,montecarlo,0.011,0.021,0.49,0.51,0.0001,0.0002,0.0003')

    def test_read_back(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'out.csv')
            owcrun.emit_csv(self.rows, path)
            self.assertEqual(owcrun.read_csv(path), self.rows)

    def test_not_results(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'other.csv')
            with open(path, 'w') as f:
                f.write("a,b\n1,2\n")
            with self.assertRaises(owc.ParseError):
                owcrun.read_csv(path)

    def test_integer_value(self):
        row = owcrun.ResultRow('U', 50, 'analytic', 0.1, 0.2, 0.3, 0.7,
                               None, None, None)
        out = io.StringIO()
        with contextlib.redirect_stdout(out):
            owcrun.emit_csv([row], '-')
        self.assertEqual(out.getvalue().splitlines()[1],
                         'U,50,analytic,0.1,0.2,0.3,0.7,,,')

    def test_unwritable(self):
        with self.assertRaises(owcrun.OutputError):
            owcrun.emit_csv(self.rows, '/nonexistent/dir/out.csv')


class TestMain(unittest.TestCase):
    def test_presets(self):
        code, out, err = run_main(['presets'])
        self.assertEqual(code, 0)
        self.assertEqual(out.split(), owcpresets.names())
        self.assertIn('fig8-outage', out.split())

    def test_show_preset(self):
        code, out, err = run_main(
            ['run', '--show-preset', 'throughput-vs-activation'])
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith('[preset]'))
        code, out, err = run_main(['run', '--show-preset', 'no-such-preset'])
        self.assertEqual(code, 1)

    def test_validate_only(self):
        with ConfigFile(SMALL) as path:
            code, out, err = run_main(['run', path, '--validate-only'])
        self.assertEqual(code, 0)
        self.assertIn("2 sweep points", out)

    def test_config_error(self):
        with ConfigFile("[optics]\nPsi_deg = 100\n") as path:
            code, out, err = run_main(['run', path])
        self.assertEqual(code, 1)
        self.assertIn("optics.Psi_deg", err)
        self.assertEqual(out, '')

    def test_seed_override(self):
        code, out, err = run_main(
            ['run', '--preset', 'throughput-vs-activation', '--mode', 'mc',
             '--validate-only'])
        self.assertEqual(code, 1)
        self.assertIn("run.seed", err)
        code, out, err = run_main(
            ['run', '--preset', 'throughput-vs-activation', '--mode', 'mc',
             '--seed', '3', '--validate-only'])
        self.assertEqual(code, 0)

    def test_numeric_error(self):
        failure = owc.SweepError(
            'L_m', 1.0, owc.ResolutionError("invert_cf:", "too coarse"))
        with mock.patch('owcrun.run_experiment', side_effect=failure):
            code, out, err = run_main(['run', '--preset', 'error-vs-height'])
        self.assertEqual(code, 2)
        self.assertIn("L_m=1.0", err)
        self.assertIn("too coarse", err)

    def test_strict_cap(self):
        text = """
            [protocol]
            U = 3
            p_a = 0.5

            [run]
            u_a_cap = 1
            strict_cap = yes
        """
        self.assertTrue(load_text(text).strict_cap)
        with ConfigFile(text) as path:
            code, out, err = run_main(['run', path])
        self.assertEqual(code, 2)
        self.assertIn("CapError", err)
        self.assertIn("u_a_cap:", err)

    def test_output_error(self):
        with mock.patch('owcrun.run_experiment',
                        return_value=TestCsv.rows):
            code, out, err = run_main(
                ['run', '--out', '/nonexistent/dir/out.csv'])
        self.assertEqual(code, 1)
        self.assertIn("OutputError", err)

    def test_run(self):
        with tempfile.TemporaryDirectory() as d:
            out_path = os.path.join(d, 'out.csv')
            with ConfigFile(SMALL) as path:
                code, out, err = run_main(['run', path, '--out', out_path])
            rows = owcrun.read_csv(out_path)
        self.assertEqual(code, 0)
        self.assertEqual(len(rows), 2)


class TestPresetTool(unittest.TestCase):
    def test_list(self):
        out = io.StringIO()
        with contextlib.redirect_stdout(out):
            code = owcpresets.main(['--list'])
        self.assertEqual(code, 0)
        self.assertIn('capture-narrow', out.getvalue().split())

    def test_show(self):
        out = io.StringIO()
        with contextlib.redirect_stdout(out):
            code = owcpresets.main(['sinr-cdf'])
        self.assertEqual(code, 0)
        self.assertIn('task = sinr_cdf', out.getvalue())

    def test_missing(self):
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = owcpresets.main(['no-such-preset'])
        self.assertEqual(code, 1)


if __name__ == '__main__':
    unittest.main()
