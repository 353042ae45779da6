#!/usr/bin/env python

# owcsinr.py - interference and SINR distributions of the reference user

"""
Distribution of the SINR seen by the reference user
when ``u_a`` devices transmit in the same slot.

The reference user's SNR ``gamma_1`` and the SNRs of the ``u_a - 1``
interferers are independent and identically distributed
(see :mod:`owcoptics`).
The interference ``gamma_I`` is their sum,
so its characteristic function (CF) is a power of the single-user CF;
the density of ``gamma_I`` is recovered from it with an FFT.
With ``lambda = gamma_I + 1`` the SINR is ``gamma_1 / lambda``.

Single-user CF
--------------

:func:`cf_single` integrates ``exp(j t gamma) f(gamma)`` over the SNR
support directly.
The density is replaced by its piecewise linear interpolant on
log-spaced cells and each cell is integrated exactly
(Filon's method), so
the result stays accurate at frequencies where the integrand
oscillates many times per cell.

Inversion
---------

:func:`invert_cf` samples the interference CF on the frequencies of a
:class:`CfGrid`, stopping early (by doubling the number of evaluated
frequencies) once the CF has decayed below 1e-8.
Negative ripple of the inverted density is clamped to zero and the
density renormalized.
A :exc:`owc.ResolutionError` is raised if that renormalization had to
move the total mass by more than 1%.

SINR
----

Given the gridded density of ``lambda``,
the SINR density and distribution are integrated exactly against the
piecewise linear interpolant of that density,
using the power law form of the SNR density.
See :class:`SinrDistribution`.

Objects returned here are immutable;
:class:`SinrStatistics` caches them per active-user count.
"""

import concurrent.futures
import dataclasses
import functools
import logging
import math
import threading
import warnings

import numpy
import scipy.integrate

import owc
import owcoptics
from owc import CapError, DomainError, ResolutionError

logger = logging.getLogger(__name__)


# Cells for the single-user CF quadrature.
CF_CELLS = 2048
# Stop evaluating the CF once it is this small.
CF_TOLERANCE = 1e-8
# Default number of FFT points.
FFT_POINTS = 2 ** 15
# Points of the SINR grid.
SINR_POINTS = 1024
# Largest active-user count with its own distribution.
DEFAULT_CAP = 32

# Bounds on the inverted density's total mass.
NORMALIZATION_TOLERANCE = 1e-3
RENORMALIZATION_LIMIT = 1e-2
# Probability above the cap that is still negligible.
CAP_WEIGHT_LIMIT = 1e-12


class CapWarning(UserWarning):
    """Counts above the cap carry probability; their terms are approximate."""


@dataclasses.dataclass(frozen=True)
class CfGrid:
    """
    Frequency grid for FFT inversion.
    `n_points` FFT points, frequency spacing ``2 * t_max / n_points``;
    the matching SNR grid has spacing ``pi / t_max`` and
    covers ``[0, span)``.
    """

    t_max: float
    n_points: int = FFT_POINTS

    def __post_init__(self):
        n = self.n_points
        if n < 2 ** 12 or n & (n - 1):
            raise DomainError(
                "CfGrid: n_points must be a power of two >= 4096, got %r" % n)
        if not self.t_max > 0:
            raise DomainError("CfGrid: t_max must be > 0")

    @property
    def delta_t(self):
        return 2.0 * self.t_max / self.n_points

    @property
    def span(self):
        """Length of the (periodic) SNR grid."""
        return 2.0 * math.pi / self.delta_t

    @classmethod
    def for_support(cls, u_a, constants, n_points=FFT_POINTS):
        """
        The grid whose SNR span is ``1.05 * (u_a - 1) * gamma_max``,
        5% more than the support of the interference.
        """

        if u_a < 2:
            raise DomainError("CfGrid.for_support: need u_a >= 2")
        span = 1.05 * (u_a - 1) * constants.gamma_max
        return cls(t_max=math.pi * n_points / span, n_points=n_points)


@functools.lru_cache(maxsize=16)
def _filon_table(constants, cells):
    """
    Cell widths, centres, mean and half difference of the SNR density
    on `cells` log-spaced cells, and the total mass of the interpolant.
    """

    edges = numpy.geomspace(constants.gamma_min, constants.gamma_max,
                            cells + 1)
    f = owcoptics.snr_pdf(edges, constants)
    h = numpy.diff(edges)
    centre = 0.5 * (edges[:-1] + edges[1:])
    mean = 0.5 * (f[:-1] + f[1:])
    half = 0.5 * (f[1:] - f[:-1])
    mass = float(numpy.sum(h * mean))
    return h, centre, mean, half, mass


def _filon_odd(theta):
    """``(sin x - x cos x) / x**2``, with its series near 0."""

    small = numpy.abs(theta) < 1e-2
    safe = numpy.where(small, 1.0, theta)
    exact = (numpy.sin(safe) - safe * numpy.cos(safe)) / safe ** 2
    t2 = theta * theta
    series = theta * (1.0 / 3 - t2 * (1.0 / 30 - t2 / 840))
    return numpy.where(small, series, exact)


def cf_single(t, constants, cells=CF_CELLS):
    """
    Characteristic function ``E[exp(j t gamma)]`` of the single-user SNR
    at frequency `t` (scalar or array).
    """

    h, centre, mean, half, mass = _filon_table(constants, cells)
    t = numpy.asarray(t, dtype=float)
    flat = t.ravel()
    out = numpy.empty(flat.shape, dtype=complex)
    chunk = 256
    for i in range(0, flat.size, chunk):
        tc = flat[i:i + chunk, numpy.newaxis]
        theta = 0.5 * tc * h
        cell = h * (mean * numpy.sinc(theta / math.pi)
                    + 1j * half * _filon_odd(theta))
        out[i:i + chunk] = numpy.sum(cell * numpy.exp(1j * tc * centre),
                                     axis=1)
    out /= mass
    out = out.reshape(t.shape)
    if out.ndim == 0:
        return complex(out)
    return out


def cf_interference(t, u_a, constants):
    """
    CF of the interference ``gamma_I``, the sum of ``u_a - 1``
    single-user SNRs.
    Identically 1 for ``u_a == 1``.
    """

    if u_a < 1:
        raise DomainError("cf_interference: need u_a >= 1, got %r" % u_a)
    if u_a == 1:
        ones = numpy.ones(numpy.shape(t), dtype=complex)
        if ones.ndim == 0:
            return 1 + 0j
        return ones
    return cf_single(t, constants) ** (u_a - 1)


@dataclasses.dataclass(frozen=True, eq=False)
class InterferenceDistribution:
    """
    Gridded density of the interference ``gamma_I`` given `u_a`
    active users.

    `gamma_grid` is uniform over ``(u_a - 1) * [gamma_min, gamma_max]``.
    `t_cut` is the highest frequency of the CF that was used,
    `cf_tail` the largest CF modulus over the upper half of the
    frequencies used (the truncation level),
    `normalization_error` the distance of the unclamped density's
    mass from 1, and `renormalization` the factor the clamped density
    was divided by.
    """

    u_a: int
    gamma_grid: numpy.ndarray
    pdf_values: numpy.ndarray
    t_cut: float = math.nan
    cf_tail: float = 0.0
    normalization_error: float = 0.0
    renormalization: float = 1.0

    def pdf(self, gamma):
        """Linear interpolation of the gridded density; 0 off the support."""
        return numpy.interp(gamma, self.gamma_grid, self.pdf_values,
                            left=0.0, right=0.0)

    def mean(self):
        return float(scipy.integrate.trapezoid(
            self.gamma_grid * self.pdf_values, self.gamma_grid))

    def lambda_grid(self):
        """Grid of ``lambda = gamma_I + 1``."""
        return self.gamma_grid + 1.0


def invert_cf(u_a, grid, constants, tolerance=CF_TOLERANCE):
    """
    Recover the density of the interference for `u_a` active users
    by FFT inversion of :func:`cf_interference` on `grid`
    (a :class:`CfGrid`).
    Returns an :class:`InterferenceDistribution`.
    """

    if u_a < 2:
        raise DomainError("invert_cf: need u_a >= 2, got %r" % u_a)
    lo = (u_a - 1) * constants.gamma_min
    hi = (u_a - 1) * constants.gamma_max
    if grid.span <= hi:
        raise ResolutionError(
            "invert_cf:",
            "grid span %.6g does not cover the support end %.6g"
            % (grid.span, hi))

    n = grid.n_points
    # Frequencies 0 .. n/2 - 1; the Nyquist term stays zero.
    limit = n // 2
    count = min(64, limit)
    phi = cf_interference(numpy.arange(count) * grid.delta_t, u_a, constants)
    while True:
        tail = numpy.abs(phi[count // 2:count])
        if tail.max() <= tolerance or count >= limit:
            break
        more = numpy.arange(count, min(2 * count, limit)) * grid.delta_t
        phi = numpy.concatenate([phi, cf_interference(more, u_a, constants)])
        count = phi.size
    t_cut = (count - 1) * grid.delta_t
    if count >= limit and tail.max() > tolerance:
        logger.info(
            "u_a=%d: CF truncated at %.3g at the grid limit t=%.6g",
            u_a, tail.max(), t_cut)

    coefficients = numpy.zeros(limit + 1, dtype=complex)
    coefficients[:count] = numpy.conj(phi)
    raw = (n / grid.span) * numpy.fft.irfft(coefficients, n=n)
    fft_gamma = numpy.arange(n) * (grid.span / n)

    # Support grid as fine as the FFT grid, with the end points on it.
    points = int(math.ceil((hi - lo) / (grid.span / n))) + 1
    gamma_grid = numpy.linspace(lo, hi, points)
    values = numpy.interp(gamma_grid, fft_gamma, raw)
    normalization_error = abs(
        scipy.integrate.trapezoid(values, gamma_grid) - 1.0)
    values = numpy.clip(values, 0.0, None)
    factor = float(scipy.integrate.trapezoid(values, gamma_grid))
    logger.debug(
        "u_a=%d: t_cut=%.6g normalization error=%.3g renormalization=%.9f",
        u_a, t_cut, normalization_error, factor)
    if normalization_error > NORMALIZATION_TOLERANCE:
        logger.warning(
            "u_a=%d: inverted density has mass off by %.3g",
            u_a, normalization_error)
    if not abs(factor - 1.0) <= RENORMALIZATION_LIMIT:
        raise ResolutionError(
            "invert_cf:",
            "u_a=%d renormalization factor %.6g; the CF grid is too coarse"
            % (u_a, factor))
    return InterferenceDistribution(
        u_a=u_a,
        gamma_grid=owc.frozen(gamma_grid),
        pdf_values=owc.frozen(values / factor),
        t_cut=t_cut,
        cf_tail=float(tail.max()),
        normalization_error=float(normalization_error),
        renormalization=factor)


def _power_difference(u, w, q):
    """``(w**q - u**q) / q`` for ``0 < u <= w``, without cancellation."""
    return u ** q * numpy.expm1(q * numpy.log1p((w - u) / u)) / q


class RatioKernel:
    """
    Cumulative integrals of the piecewise linear density of ``lambda``,
    plain and weighted by ``lambda ** -b``.
    They are all the SINR formulas need.
    """

    def __init__(self, lam, f, b):
        self.lam = owc.frozen(lam)
        self.f = owc.frozen(f)
        self.b = b
        self.slope = owc.frozen(numpy.diff(f) / numpy.diff(lam))
        u = lam[:-1]
        w = lam[1:]
        seg0 = 0.5 * (f[:-1] + f[1:]) * (w - u)
        segb = self._segment_b(u, w, f[:-1], self.slope)
        self.h0 = owc.frozen(numpy.concatenate([[0.0], numpy.cumsum(seg0)]))
        self.hb = owc.frozen(numpy.concatenate([[0.0], numpy.cumsum(segb)]))

    def _segment_b(self, u, w, fu, s):
        b = self.b
        p1 = _power_difference(u, w, 1.0 - b)
        p2 = _power_difference(u, w, 2.0 - b)
        return (fu - s * u) * p1 + s * p2

    def _locate(self, w):
        w = numpy.clip(w, self.lam[0], self.lam[-1])
        i = numpy.searchsorted(self.lam, w, side='right') - 1
        i = numpy.clip(i, 0, self.lam.size - 2)
        return w, i

    def integral0(self, w):
        """``integral of f(lambda)`` from the bottom of the support to `w`."""
        w, i = self._locate(w)
        d = w - self.lam[i]
        return numpy.where(
            w >= self.lam[-1], self.h0[-1],
            self.h0[i] + self.f[i] * d + 0.5 * self.slope[i] * d * d)

    def integralb(self, w):
        """``integral of lambda**-b f(lambda)`` from the bottom to `w`."""
        w, i = self._locate(w)
        u = self.lam[i]
        return numpy.where(
            w >= self.lam[-1], self.hb[-1],
            self.hb[i] + self._segment_b(u, w, self.f[i], self.slope[i]))


def sinr_support(u_a, constants):
    """End points of the SINR support given `u_a` active users."""

    if u_a < 1:
        raise DomainError("sinr_support: need u_a >= 1, got %r" % u_a)
    k = u_a - 1
    return (constants.gamma_min / (k * constants.gamma_max + 1),
            constants.gamma_max / (k * constants.gamma_min + 1))


@dataclasses.dataclass(frozen=True, eq=False)
class SinrDistribution:
    """
    SINR of the reference user given `u_a` active users.

    `sinr_grid` is log-spaced over the support and
    `pdf_values`, `cdf_values` are tabulated there;
    the :meth:`pdf` and :meth:`cdf` methods evaluate anywhere.
    For ``u_a == 1`` there is no interference and
    the closed-form single-user SNR statistics are used.
    """

    u_a: int
    constants: owcoptics.DerivedConstants
    sinr_grid: numpy.ndarray
    pdf_values: numpy.ndarray
    cdf_values: numpy.ndarray
    interference: InterferenceDistribution = None
    kernel: RatioKernel = None

    @property
    def support(self):
        return (float(self.sinr_grid[0]), float(self.sinr_grid[-1]))

    def _windows(self, x):
        c = self.constants
        lam = self.kernel.lam
        wl = numpy.clip(c.gamma_min / x, lam[0], lam[-1])
        wh = numpy.clip(c.gamma_max / x, lam[0], lam[-1])
        return wl, wh

    def pdf(self, x):
        """Density at `x` (scalar or array)."""

        if self.kernel is None:
            return owcoptics.snr_pdf(x, self.constants)
        x = numpy.asarray(x, dtype=float)
        positive = x > 0
        safe = numpy.where(positive, x, 1.0)
        wl, wh = self._windows(safe)
        k = self.kernel
        c = self.constants
        value = (c.pdf_coefficient * safe ** (-1.0 - c.b)
                 * (k.integralb(wh) - k.integralb(wl)))
        value = numpy.where(positive, numpy.clip(value, 0.0, None), 0.0)
        if value.ndim == 0:
            return float(value)
        return value

    def cdf(self, x):
        """Probability that the SINR is at most `x`."""

        if self.kernel is None:
            return owcoptics.snr_cdf(x, self.constants)
        x = numpy.asarray(x, dtype=float)
        positive = x > 0
        safe = numpy.where(positive, x, 1.0)
        wl, wh = self._windows(safe)
        k = self.kernel
        c = self.constants
        c0 = 1.0 + c.L ** 2 / c.D ** 2
        c1 = c.scale / c.D ** 2
        h0l = k.integral0(wl)
        h0h = k.integral0(wh)
        value = ((k.h0[-1] - h0h) + c0 * (h0h - h0l)
                 - c1 * safe ** -c.b * (k.integralb(wh) - k.integralb(wl)))
        value = numpy.where(positive, numpy.clip(value, 0.0, 1.0), 0.0)
        if value.ndim == 0:
            return float(value)
        return value


def build_sinr_distribution(u_a, constants, interference=None,
                            points=SINR_POINTS):
    """
    Construct the :class:`SinrDistribution` for `u_a` active users.
    For ``u_a >= 2`` the `interference` distribution is computed
    with :func:`invert_cf` if not supplied.
    """

    if u_a < 1:
        raise DomainError(
            "build_sinr_distribution: need u_a >= 1, got %r" % u_a)
    lo, hi = sinr_support(u_a, constants)
    grid = numpy.geomspace(lo, hi, points)
    kernel = None
    if u_a >= 2:
        if interference is None:
            interference = invert_cf(
                u_a, CfGrid.for_support(u_a, constants), constants)
        elif interference.u_a != u_a:
            raise DomainError(
                "build_sinr_distribution: interference is for u_a=%d, not %d"
                % (interference.u_a, u_a))
        kernel = RatioKernel(interference.lambda_grid(),
                             interference.pdf_values, constants.b)
    else:
        interference = None
    partial = SinrDistribution(
        u_a=u_a, constants=constants, sinr_grid=owc.frozen(grid),
        pdf_values=owc.frozen([]), cdf_values=owc.frozen([]),
        interference=interference, kernel=kernel)
    return dataclasses.replace(
        partial,
        pdf_values=owc.frozen(partial.pdf(grid)),
        cdf_values=owc.frozen(partial.cdf(grid)))


def sinr_pdf_conditional(x, u_a, constants, interference=None):
    """Density of the reference user's SINR at `x` given `u_a`."""

    if u_a == 1:
        return owcoptics.snr_pdf(x, constants)
    return build_sinr_distribution(u_a, constants, interference).pdf(x)


def sinr_cdf_conditional(gamma, u_a, constants, interference=None):
    """Distribution function of the reference user's SINR given `u_a`."""

    if u_a == 1:
        return owcoptics.snr_cdf(gamma, constants)
    return build_sinr_distribution(u_a, constants, interference).cdf(gamma)


def dump_distribution(grid, values, out):
    """
    Write a two-column text dump, header ``# gamma pdf``,
    to `out` (a path or a text file).
    """

    if isinstance(out, str):
        with open(out, 'w') as f:
            return dump_distribution(grid, values, f)
    out.write("# gamma pdf\n")
    for g, v in zip(numpy.asarray(grid), numpy.asarray(values)):
        out.write("%.12g %.12g\n" % (g, v))


class SinrStatistics:
    """
    Cache of :class:`SinrDistribution` objects for one system,
    for active-user counts 1 up to `cap`.
    Counts above `cap` share the distribution of `cap`;
    :meth:`check_cap` says whether that matters
    (a :class:`CapWarning`, or :exc:`owc.CapError` when `strict`).

    :meth:`memo` stores any other per-count result
    (the conditional error and outage probabilities).
    Every entry is written once; concurrent callers may compute the
    same entry twice, and the first one stored wins.
    """

    def __init__(self, constants, cap=DEFAULT_CAP, n_points=FFT_POINTS,
                 strict=False):
        if cap < 1:
            raise DomainError("SinrStatistics: cap must be >= 1")
        self.constants = constants
        self.cap = cap
        self.strict = strict
        self.n_points = n_points
        self._lock = threading.Lock()
        self._distributions = {}
        self._memo = {}

    def key(self, u_a):
        if u_a < 1:
            raise DomainError("SinrStatistics: need u_a >= 1, got %r" % u_a)
        return min(u_a, self.cap)

    def distribution(self, u_a):
        k = self.key(u_a)
        with self._lock:
            found = self._distributions.get(k)
        if found is not None:
            return found
        interference = None
        if k >= 2:
            interference = invert_cf(
                k, CfGrid.for_support(k, self.constants, self.n_points),
                self.constants)
        made = build_sinr_distribution(k, self.constants, interference)
        with self._lock:
            return self._distributions.setdefault(k, made)

    def check_cap(self, weights):
        """
        Probability that `weights`, a list of ``(k, P[U_a = k])``,
        puts above the cap.
        From :data:`CAP_WEIGHT_LIMIT` on, warn or raise.
        """

        above = sum(w for k, w in weights if k > self.cap)
        if above < CAP_WEIGHT_LIMIT:
            return above
        message = (
            "U_a above %d carries probability %.3g;"
            " those terms use the U_a=%d distribution"
            % (self.cap, above, self.cap))
        if self.strict:
            raise CapError("u_a_cap:", message)
        warnings.warn(message, CapWarning, stacklevel=3)
        return above

    def interference(self, u_a):
        return self.distribution(u_a).interference

    def prepare(self, counts, workers=None):
        """Build the distributions for `counts`, in threads."""

        keys = sorted({self.key(k) for k in counts})
        with concurrent.futures.ThreadPoolExecutor(workers) as pool:
            list(pool.map(self.distribution, keys))

    def memo(self, key, compute):
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        value = compute()
        with self._lock:
            return self._memo.setdefault(key, value)
