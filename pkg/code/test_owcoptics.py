# Tests for owcoptics: geometry, channel gain, single-user SNR.

# Run the tests from the command line:
#   python -m pytest test_owcoptics.py

import math
import unittest

import numpy
import scipy.stats

import owc
import owcoptics
from owcoptics import CellGeometry, OpticalFrontend, SystemConfig


def reference_constants(**frontend):
    """Derived constants of the reference cell (D = 4 m, L = 3 m)."""
    system = SystemConfig(OpticalFrontend(**frontend), CellGeometry())
    return owcoptics.derive_constants(system)


class TestLambertian(unittest.TestCase):
    def test_sixty_degrees(self):
        self.assertAlmostEqual(
            owcoptics.lambertian_order(math.radians(60)), 1.0, places=12)

    def test_thirty_degrees(self):
        m = owcoptics.lambertian_order(math.radians(30))
        self.assertAlmostEqual(m, 4.8188, delta=1e-4)

    def test_wide_beam(self):
        """Order falls towards 0 as the semi-angle nears 90 degrees."""
        previous = math.inf
        for degrees in (80, 85, 89, 89.9, 89.999):
            m = owcoptics.lambertian_order(math.radians(degrees))
            self.assertGreater(m, 0)
            self.assertLess(m, previous)
            previous = m
        self.assertLess(previous, 0.1)

    def test_domain(self):
        for bad in (0.0, math.pi / 2, -0.1, 2.0):
            with self.assertRaises(owc.DomainError):
                owcoptics.lambertian_order(bad)


class TestConcentrator(unittest.TestCase):
    def test_inside(self):
        g = owcoptics.concentrator_gain(0.3, 1.5, math.pi / 2)
        self.assertAlmostEqual(g, 2.25)

    def test_edge(self):
        Psi = math.radians(60)
        g = owcoptics.concentrator_gain(Psi, 1.5, Psi)
        self.assertAlmostEqual(g, 2.25 / math.sin(Psi) ** 2)

    def test_outside(self):
        self.assertEqual(owcoptics.concentrator_gain(1.0, 1.5, 0.5), 0.0)


class TestConfig(unittest.TestCase):
    def test_defaults(self):
        fe = OpticalFrontend()
        self.assertEqual(fe.P_t, 30e-3)
        self.assertEqual(fe.A_r, 1e-4)
        self.assertEqual(fe.B, 200e3)

    def test_positive(self):
        with self.assertRaises(owc.ConfigError):
            OpticalFrontend(eta=0)
        with self.assertRaises(owc.ConfigError):
            CellGeometry(D=-1)

    def test_field_of_view_range(self):
        with self.assertRaises(owc.ConfigError) as cm:
            OpticalFrontend(Psi=math.radians(100))
        self.assertIn("field of view", str(cm.exception))

    def test_devices_outside_view(self):
        """atan(4/3) is about 53 degrees."""
        frontend = OpticalFrontend(Psi=math.radians(45))
        with self.assertRaises(owc.ConfigError) as cm:
            SystemConfig(frontend, CellGeometry(D=4, L=3))
        self.assertIn("field-of-view", str(cm.exception))
        SystemConfig(frontend, CellGeometry(D=2, L=3))


class TestDerived(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.c = reference_constants()

    def test_reference_values(self):
        c = self.c
        self.assertAlmostEqual(c.m, 1.0, places=12)
        self.assertAlmostEqual(c.sigma_n2, 2e-16, delta=1e-28)
        self.assertAlmostEqual(c.mu / 2.88e12, 1.0, places=12)
        X = 1e-4 * 2 * 0.4 / (2 * math.pi) * 2.25 * 9
        self.assertAlmostEqual(c.X / X, 1.0, places=10)

    def test_support(self):
        c = self.c
        k = c.mu * c.X ** 2
        self.assertAlmostEqual(c.gamma_max / (k / 3 ** 8), 1.0, places=10)
        self.assertAlmostEqual(c.gamma_min / (k / 25 ** 4), 1.0, places=10)
        self.assertAlmostEqual(c.gamma_max, 29.18, delta=0.01)
        self.assertAlmostEqual(c.gamma_min, 0.4901, delta=1e-4)
        self.assertLess(c.h_min, c.h_max)

    def test_channel_gain(self):
        c = self.c
        self.assertAlmostEqual(owcoptics.channel_gain(0.0, c) / c.h_max, 1.0)
        self.assertAlmostEqual(owcoptics.channel_gain(4.0, c) / c.h_min, 1.0)
        h = owcoptics.channel_gain(numpy.array([0.0, 1.0, 2.0]), c)
        self.assertTrue(numpy.all(numpy.diff(h) < 0))

    def test_channel_gain_domain(self):
        with self.assertRaises(owc.DomainError):
            owcoptics.channel_gain(4.5, self.c)
        with self.assertRaises(owc.DomainError):
            owcoptics.channel_gain([-0.1, 1.0], self.c)

    def test_cdf_ends(self):
        c = self.c
        self.assertAlmostEqual(owcoptics.snr_cdf(c.gamma_min, c), 0.0)
        self.assertAlmostEqual(owcoptics.snr_cdf(c.gamma_max, c), 1.0)
        self.assertEqual(owcoptics.snr_cdf(0.1, c), 0.0)
        self.assertEqual(owcoptics.snr_cdf(100.0, c), 1.0)

    def test_median(self):
        """Half the devices lie within r**2 = 8."""
        c = self.c
        median = c.mu * c.X ** 2 / 17 ** 4
        self.assertAlmostEqual(owcoptics.snr_cdf(median, c), 0.5, places=12)

    def test_pdf_normalized(self):
        c = self.c
        total = owc.integrate(lambda g: owcoptics.snr_pdf(g, c),
                              c.gamma_min, c.gamma_max)
        self.assertAlmostEqual(total, 1.0, places=9)

    def test_pdf_outside(self):
        c = self.c
        values = owcoptics.snr_pdf([0.1, 30.0, -1.0], c)
        self.assertTrue(numpy.all(values == 0))

    def test_pdf_is_derivative(self):
        c = self.c
        for g in (0.6, 2.0, 10.0, 25.0):
            h = 1e-6 * g
            slope = (owcoptics.snr_cdf(g + h, c)
                     - owcoptics.snr_cdf(g - h, c)) / (2 * h)
            self.assertAlmostEqual(slope / owcoptics.snr_pdf(g, c), 1.0,
                                   places=6)

    def test_mean(self):
        """
        For m = 1,
        E[gamma] = mu X**2 / (3 D**2) (L**-6 - (D**2 + L**2)**-3).
        """
        c = self.c
        expected = c.mu * c.X ** 2 / (3 * 16) * (3.0 ** -6 - 25.0 ** -3)
        self.assertAlmostEqual(owcoptics.snr_mean(c) / expected, 1.0,
                               places=8)

    def test_narrow_beam(self):
        c = reference_constants(Phi_half=math.radians(30))
        self.assertAlmostEqual(c.m, 4.8188, delta=1e-4)
        self.assertLess(c.gamma_min, 0.1)
        self.assertGreater(c.gamma_max, 200)


class TestSampling(unittest.TestCase):
    def test_sample_radius(self):
        self.assertEqual(owcoptics.sample_radius(0.25, 4.0), 2.0)
        self.assertEqual(owcoptics.sample_radius(1.0, 4.0), 4.0)
        r = owcoptics.sample_radius(numpy.array([0.0, 0.25]), 4.0)
        self.assertEqual(list(r), [0.0, 2.0])

    def test_uniform_in_area(self):
        """Fraction of devices within D/2 is a quarter."""
        rng = numpy.random.default_rng(7)
        r = owcoptics.sample_radius(rng.random(100000), 4.0)
        self.assertAlmostEqual(numpy.mean(r <= 2.0), 0.25, delta=0.005)

    def test_radius_distribution(self):
        """Kolmogorov-Smirnov distance to r**2 / D**2 on 1e6 draws."""
        D = 4.0
        rng = numpy.random.default_rng(8)
        r = owcoptics.sample_radius(rng.random(1000000), D)
        result = scipy.stats.kstest(r, lambda x: (x / D) ** 2)
        self.assertLessEqual(result.statistic, 2e-3)


if __name__ == '__main__':
    unittest.main()
