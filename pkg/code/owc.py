#!/usr/bin/env python

# owc.py - shared core for the owcsa modules
#
# LICENCE (MIT)
#
# Permission is hereby granted, free of charge, to any person
# obtaining a copy of this software and associated documentation files
# (the "Software"), to deal in the Software without restriction,
# including without limitation the rights to use, copy, modify, merge,
# publish, distribute, sublicense, and/or sell copies of the Software,
# and to permit persons to whom the Software is furnished to do so,
# subject to the following conditions:
#
# The above copyright notice and this permission notice shall be
# included in all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
# EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF
# MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS
# BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN
# ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN
# CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

"""
The ``owc`` module holds what every other ``owcsa`` module shares:
the version, the exception hierarchy, and a couple of numerical helpers.

The package evaluates slotted ALOHA with capture in an indoor
optical wireless (OWC) IoT cell:
one access point on the ceiling,
``U`` devices spread uniformly over a disk below it,
each transmitting in a slot with probability ``p_a``.
The modules are layered bottom-up:

- :mod:`owcoptics` geometry, Lambertian channel gain, single-user SNR;
- :mod:`owcsinr` characteristic function, FFT inversion,
  conditional SINR of the reference user;
- :mod:`owcfbl` finite blocklength error probability;
- :mod:`owcaloha` binomial activity, throughput, outage;
- :mod:`owcmc` the Monte Carlo oracle;
- :mod:`owcrun` configuration files, sweeps, CSV output.

Units
-----

Inside the library everything is SI and angles are radians.
Only the configuration files (see :mod:`owcrun`) use
mW, cm², kHz and degrees,
and they say so in their key names.

SNR and SINR values are linear (not dB) throughout.
"""

__version__ = "0.1.0"

import logging

import numpy
import scipy.integrate

logger = logging.getLogger(__name__)


__all__ = ['Error', 'ConfigError', 'ParseError', 'UnknownKeyError',
           'DomainError', 'NumericError', 'ResolutionError',
           'BracketError', 'CapError', 'SweepError', 'integrate',
           'frozen']


# Absolute tolerance for every finite-interval quadrature.
QUAD_EPSABS = 1e-9


class Error(Exception):
    def __str__(self):
        return self.__class__.__name__ + ': ' + ' '.join(self.args)


class ConfigError(Error):
    """
    A configuration value violates an invariant.
    The message starts with the path of the offending field,
    for example ``optics.Psi_deg``.
    """


class ParseError(ConfigError):
    """Configuration file is malformed."""


class UnknownKeyError(ConfigError):
    """Unknown section, key, or sweep parameter."""


class DomainError(Error, ValueError):
    """
    An argument is outside the domain of the operation
    (for example ``q_inv(0)``, or a radius outside the cell).
    """


class NumericError(Error):
    """A numerical procedure failed to deliver the promised accuracy."""


class ResolutionError(NumericError):
    """The inversion grid is too coarse for the distribution."""


class BracketError(NumericError):
    pass


class CapError(NumericError):
    """
    Active-user counts above the distribution cap carry more than
    negligible probability.
    """


class SweepError(NumericError):
    """
    A numerical failure at one point of a parameter sweep.
    `param` and `value` identify the point.
    """

    def __init__(self, param, value, cause):
        super().__init__(
            "at %s=%s:" % (param, value), str(cause))
        self.param = param
        self.value = value
        self.cause = cause


def integrate(f, a, b, points=None, epsabs=QUAD_EPSABS, epsrel=1e-10,
              limit=200):
    """
    Integrate the scalar function `f` over the finite interval [`a`, `b`]
    with QUADPACK's adaptive Gauss--Kronrod scheme.
    `points` are optional break points (an initial subdivision).
    Returns the value only;
    when QUADPACK reports a problem
    its message and error estimate go to the log.
    """

    if b <= a:
        return 0.0
    if points is not None:
        points = [p for p in points if a < p < b]
        limit = max(limit, 2 * len(points) + 50)
        if not points:
            points = None
    # full_output keeps scipy from issuing IntegrationWarning.
    result = scipy.integrate.quad(
        f, a, b, points=points, epsabs=epsabs, epsrel=epsrel, limit=limit,
        full_output=1)
    value, error = result[0], result[1]
    if len(result) > 3:
        logger.info("quad on [%.6g, %.6g]: %s (error estimate %.3g)",
                    a, b, ' '.join(str(result[3]).split()[:12]), error)
    return value


def frozen(a, dtype=float):
    """
    Return a read-only copy of `a` as a numpy array.
    Distribution objects store their grids this way.
    """

    a = numpy.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


def main(argv=None):
    """Report version and location: ``python -m owc``."""
    print(__version__, __file__)


if __name__ == '__main__':
    main()
