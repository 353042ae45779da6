#!/usr/bin/env python

# owcfbl.py - finite blocklength error probability

"""
Error probability of a packet of ``n`` channel uses at rate ``R``
under the normal approximation::

  eps(gamma) = Q(sqrt(n / V(gamma)) * (C(gamma) - R))

with ``C(gamma) = log2(1 + gamma)`` and ``V`` the channel dispersion.
The ``O(log n / n)`` correction is dropped,
which is reasonable for ``n >= 100``;
shorter blocks are accepted only when asked for, with a
:class:`ShortBlocklengthWarning`.

Two dispersions are available (:class:`DispersionKind`):
the AWGN one,
and the nearest-neighbour decoding one (the default) which is the
right one when the interference is not Gaussian, as here.
"""

import dataclasses
import enum
import logging
import math
import warnings

import numpy
import scipy.optimize
import scipy.special

import owc
from owc import BracketError, ConfigError, DomainError

logger = logging.getLogger(__name__)

LOG2E_SQUARED = math.log2(math.e) ** 2

# sinr_threshold gives up above this SNR.
GAMMA_BRACKET_MAX = 1e12
# Break points every this many SINR grid points.
BREAK_STRIDE = 16


class ShortBlocklengthWarning(UserWarning):
    """Block length below 100, where the normal approximation is loose."""


class DispersionKind(enum.Enum):
    AWGN = 'awgn'
    NEAREST_NEIGHBOR = 'nearest_neighbor'

    @classmethod
    def parse(cls, text):
        try:
            return cls(text.strip().lower().replace('-', '_'))
        except ValueError:
            raise ConfigError(
                "fbl.dispersion:",
                "must be one of %s, got %r"
                % (', '.join(k.value for k in cls), text)) from None


@dataclasses.dataclass(frozen=True)
class FblParams:
    """
    Block length `n`, rate `R` (bits per channel use),
    the `dispersion` kind, and the target error probability
    `eps_th` that defines outage.

    `n` below 100 needs `allow_short`.
    `awgn_squared_gamma` selects the AWGN dispersion variant
    ``1 - 1/(1 + gamma**2)`` instead of the usual ``1 - 1/(1 + gamma)**2``.
    """

    n: int = 128
    R: float = 0.5
    dispersion: DispersionKind = DispersionKind.NEAREST_NEIGHBOR
    eps_th: float = 1e-3
    allow_short: bool = False
    awgn_squared_gamma: bool = False

    def __post_init__(self):
        if not isinstance(self.dispersion, DispersionKind):
            object.__setattr__(
                self, 'dispersion', DispersionKind.parse(self.dispersion))
        if self.n < 1:
            raise ConfigError("fbl.n:", "must be >= 1, got %r" % self.n)
        if self.n < 100:
            if not self.allow_short:
                raise ConfigError(
                    "fbl.n:",
                    "block length %d < 100 needs"
                    " allow_short_blocklength = yes" % self.n)
            warnings.warn(
                "block length n=%d < 100: normal approximation"
                " without the log(n)/n term" % self.n,
                ShortBlocklengthWarning, stacklevel=3)
        if not self.R > 0:
            raise ConfigError("fbl.R:", "must be > 0, got %r" % self.R)
        if not 0 < self.eps_th < 1:
            raise ConfigError(
                "fbl.eps_th:", "must be in (0, 1), got %r" % self.eps_th)


def capacity(gamma):
    """``log2(1 + gamma)`` in bits per channel use."""

    value = numpy.log1p(gamma) / math.log(2.0)
    if numpy.ndim(value) == 0:
        return float(value)
    return value


def dispersion(gamma, kind=DispersionKind.NEAREST_NEIGHBOR,
               awgn_squared_gamma=False):
    """Channel dispersion in squared bits."""

    gamma = numpy.asarray(gamma, dtype=float)
    if kind is DispersionKind.NEAREST_NEIGHBOR:
        v = 2.0 * gamma / (1.0 + gamma)
    elif awgn_squared_gamma:
        v = 1.0 - 1.0 / (1.0 + gamma ** 2)
    else:
        v = 1.0 - 1.0 / (1.0 + gamma) ** 2
    v = v * LOG2E_SQUARED
    if v.ndim == 0:
        return float(v)
    return v


def q_func(z):
    """Gaussian tail ``Q(z) = P(N(0, 1) > z)``."""

    value = 0.5 * scipy.special.erfc(numpy.asarray(z, dtype=float)
                                     / math.sqrt(2.0))
    if numpy.ndim(value) == 0:
        return float(value)
    return value


def q_inv(p):
    """
    The `z` with ``Q(z) = p``, by a bracketed root solve.
    Raises :exc:`owc.DomainError` unless ``0 < p < 1``.
    """

    if not 0 < p < 1:
        raise DomainError("q_inv: need 0 < p < 1, got %r" % p)
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -q_inv(1.0 - p)
    return scipy.optimize.brentq(
        lambda z: q_func(z) - p, 0.0, 40.0, xtol=1e-15, rtol=1e-15,
        maxiter=500)


def error_prob_instant(gamma, params):
    """
    Error probability at SINR `gamma` (scalar or array).
    At ``gamma == 0`` it is 1.
    """

    gamma = numpy.asarray(gamma, dtype=float)
    positive = gamma > 0
    safe = numpy.where(positive, gamma, 1.0)
    v = dispersion(safe, params.dispersion, params.awgn_squared_gamma)
    z = numpy.sqrt(params.n / v) * (capacity(safe) - params.R)
    value = numpy.where(positive, q_func(z), 1.0)
    if value.ndim == 0:
        return float(value)
    return value


def sinr_threshold(params):
    """
    The SINR at which the error probability equals `params.eps_th`,
    found by bisection.
    ``eps_th == 0.5`` gives ``2**R - 1`` exactly.
    """

    eps = params.eps_th
    if not 0 < eps <= 0.5:
        raise DomainError(
            "sinr_threshold: need 0 < eps_th <= 0.5, got %r" % eps)
    low = 2.0 ** params.R - 1.0
    if eps == 0.5:
        return low
    high = 2.0 * low
    while error_prob_instant(high, params) > eps:
        high *= 2.0
        if high > GAMMA_BRACKET_MAX:
            raise BracketError(
                "sinr_threshold:",
                "eps_th=%g not reached below gamma=%g" % (
                    eps, GAMMA_BRACKET_MAX))
    root = scipy.optimize.bisect(
        lambda g: error_prob_instant(g, params) - eps, low, high,
        xtol=1e-14, rtol=1e-15, maxiter=400)
    logger.debug("gamma_th=%.12g for %r", root, params)
    return root


def error_prob_conditional(u_a, sinr, params):
    """
    Error probability of the reference user given `u_a` active users:
    the instantaneous error probability averaged over the
    :class:`owcsinr.SinrDistribution` `sinr`.
    """

    if sinr.u_a != u_a:
        raise DomainError(
            "error_prob_conditional: distribution is for u_a=%d, not %d"
            % (sinr.u_a, u_a))
    lo, hi = sinr.support
    return average_error(sinr.pdf, lo, hi, params,
                         points=sinr.sinr_grid[BREAK_STRIDE:-1:BREAK_STRIDE])


def average_error(pdf, lo, hi, params, points=None):
    """
    Integral of the error probability against the density `pdf`
    over [`lo`, `hi`], clipped to [0, 1].
    """

    if points is None:
        points = numpy.geomspace(lo, hi, 65)[1:-1]
    value = owc.integrate(
        lambda x: error_prob_instant(x, params) * pdf(x),
        lo, hi, points=points)
    return min(max(value, 0.0), 1.0)


def error_prob_unconditional(protocol, params, stats):
    """
    Unconditional error probability:
    the conditional ones weighted by the probability of each active
    count (see :func:`owcaloha.activity_weights`).
    """

    import owcaloha

    return owcaloha.unconditional_error(protocol, params, stats)
