#!/usr/bin/env python

# owcaloha.py - slotted ALOHA with and without capture

"""
The slotted ALOHA layer.

Each of ``U`` devices is active in a slot with probability ``p_a``,
independently, so the number of active devices ``U_a`` is binomial.
A randomly chosen active device is the *reference user*;
the others interfere with it.

With capture, the AP decodes the reference user whenever its SINR
allows (the finite blocklength error probability decides).
Without capture, a slot is useful only when exactly one device is active.

Metrics, for either variant:

- ``epsilon``, unconditional error probability;
- ``throughput``, ``R * (P[active] - epsilon)`` bits per channel use;
- ``p_out``, the probability that the SINR is below the threshold
  at which the error probability would be ``eps_th``;
- ``reliability``, ``1 - p_out``.

:func:`evaluate` computes all of them at once and keeps the per-count
breakdown (the ``per_k`` audit) in the :class:`MetricsReport`.
"""

import collections
import dataclasses
import logging
import math

import numpy
import scipy.stats

import owcfbl
import owcoptics
from owc import ConfigError, DomainError

logger = logging.getLogger(__name__)

# Activity weights below this are skipped.
WEIGHT_FLOOR = 1e-12


@dataclasses.dataclass(frozen=True)
class ProtocolConfig:
    """`U` devices, activation probability `p_a`, `capture` on or off."""

    U: int = 50
    p_a: float = 0.05
    capture: bool = True

    def __post_init__(self):
        if not self.U >= 1:
            raise ConfigError("protocol.U:", "must be >= 1, got %r" % self.U)
        if not 0 <= self.p_a <= 1:
            raise ConfigError(
                "protocol.p_a:", "must be in [0, 1], got %r" % self.p_a)


# One line of the per_k audit.
KTerm = collections.namedtuple('KTerm', 'k weight epsilon p_out')


@dataclasses.dataclass(frozen=True)
class MetricsReport:
    """
    Metrics for one configuration point.

    `throughput_raw` is the value before clamping at 0.
    `per_k` holds a :class:`KTerm` per active count that contributed;
    `p_idle` is the probability of an empty slot.
    With capture the weights in `per_k` plus `p_idle` sum to 1
    (up to the skipped weights below 1e-12);
    without capture only ``k = 1`` appears.
    The ``se_`` fields are standard errors, ``None`` for analytic results.
    """

    epsilon: float
    throughput: float
    throughput_raw: float
    p_out: float
    reliability: float
    per_k: tuple = ()
    p_idle: float = 0.0
    se_epsilon: float = None
    se_throughput: float = None
    se_p_out: float = None


def active_prob(k, U, p_a):
    """``P[U_a = k]``, computed in log space."""

    if not 0 <= k <= U:
        raise DomainError("active_prob: need 0 <= k <= U, got k=%r U=%r"
                          % (k, U))
    if p_a == 0:
        return 1.0 if k == 0 else 0.0
    if p_a == 1:
        return 1.0 if k == U else 0.0
    return float(numpy.exp(scipy.stats.binom.logpmf(k, U, p_a)))


def activity_weights(protocol, floor=WEIGHT_FLOOR):
    """
    List of ``(k, P[U_a = k])`` for ``k >= 1`` with weights at least
    `floor`.
    """

    k = numpy.arange(1, protocol.U + 1)
    if protocol.p_a == 0:
        return []
    if protocol.p_a == 1:
        return [(protocol.U, 1.0)]
    w = numpy.exp(scipy.stats.binom.logpmf(k, protocol.U, protocol.p_a))
    keep = w >= floor
    return [(int(a), float(b)) for a, b in zip(k[keep], w[keep])]


def p_active(protocol):
    """``1 - (1 - p_a)**U``, the probability that a slot is not empty."""

    if protocol.p_a == 1:
        return 1.0
    return -math.expm1(protocol.U * math.log1p(-protocol.p_a))


def conditional_error(k, params, stats):
    """Memoized :func:`owcfbl.error_prob_conditional` for count `k`."""

    key = stats.key(k)
    return stats.memo(
        ('epsilon', key, params),
        lambda: owcfbl.error_prob_conditional(
            key, stats.distribution(key), params))


def outage_conditional(u_a, gamma_th, stats):
    """``P[SINR < gamma_th | U_a = u_a]``."""

    if not gamma_th > 0:
        raise DomainError("outage_conditional: need gamma_th > 0")
    key = stats.key(u_a)
    return stats.memo(
        ('p_out', key, gamma_th),
        lambda: float(stats.distribution(key).cdf(gamma_th)))


def single_user_error(params, constants):
    """Error probability of a lone user, from the closed-form SNR density."""

    return owcfbl.average_error(
        lambda g: owcoptics.snr_pdf(g, constants),
        constants.gamma_min, constants.gamma_max, params)


def _single_error(params, stats):
    return stats.memo(
        ('single_epsilon', params),
        lambda: single_user_error(params, stats.constants))


def unconditional_error(protocol, params, stats):
    """Sum over active counts of ``epsilon(k) * P[U_a = k]``."""

    if not protocol.capture:
        return _single_error(params, stats) * _exactly_one(protocol)
    weights = activity_weights(protocol)
    stats.check_cap(weights)
    return sum(w * conditional_error(k, params, stats) for k, w in weights)


def outage_unconditional(protocol, gamma_th, stats):
    """Sum over active counts of ``P_out(k) * P[U_a = k]``."""

    if not protocol.capture:
        return (owcoptics.snr_cdf(gamma_th, stats.constants)
                * _exactly_one(protocol))
    weights = activity_weights(protocol)
    stats.check_cap(weights)
    return sum(w * outage_conditional(k, gamma_th, stats)
               for k, w in weights)


def _exactly_one(protocol):
    return active_prob(1, protocol.U, protocol.p_a)


def _throughput(protocol, params, epsilon):
    if protocol.capture:
        useful = p_active(protocol)
    else:
        useful = _exactly_one(protocol)
    return params.R * (useful - epsilon)


def throughput_capture(protocol, params, stats):
    """``R * ((1 - (1 - p_a)**U) - epsilon)``, clamped at 0."""

    protocol = dataclasses.replace(protocol, capture=True)
    eps = unconditional_error(protocol, params, stats)
    return max(_throughput(protocol, params, eps), 0.0)


def throughput_no_capture(protocol, params, stats):
    """``R * (P[U_a = 1] - epsilon)`` with only lone users decoded."""

    protocol = dataclasses.replace(protocol, capture=False)
    eps = unconditional_error(protocol, params, stats)
    return max(_throughput(protocol, params, eps), 0.0)


def reliability(p_out):
    """``1 - p_out``."""

    if not 0 <= p_out <= 1:
        raise DomainError("reliability: need 0 <= p_out <= 1")
    return 1.0 - p_out


def evaluate(protocol, params, stats, gamma_th=None):
    """
    All the metrics of `protocol` with block parameters `params`
    against the SINR statistics `stats`
    (a :class:`owcsinr.SinrStatistics`),
    returned as a :class:`MetricsReport`.
    `gamma_th` defaults to :func:`owcfbl.sinr_threshold` of `params`.
    """

    if gamma_th is None:
        gamma_th = owcfbl.sinr_threshold(params)
    p_idle = active_prob(0, protocol.U, protocol.p_a)
    epsilon = unconditional_error(protocol, params, stats)
    p_out = outage_unconditional(protocol, gamma_th, stats)
    # The sums above memoized every term; the audit reads them back.
    per_k = []
    if protocol.capture:
        for k, w in activity_weights(protocol):
            per_k.append(KTerm(k, w, conditional_error(k, params, stats),
                               outage_conditional(k, gamma_th, stats)))
    else:
        w = _exactly_one(protocol)
        if w > 0:
            per_k.append(KTerm(
                1, w, _single_error(params, stats),
                owcoptics.snr_cdf(gamma_th, stats.constants)))
    epsilon = min(max(epsilon, 0.0), 1.0)
    p_out = min(max(p_out, 0.0), 1.0)
    raw = _throughput(protocol, params, epsilon)
    report = MetricsReport(
        epsilon=epsilon,
        throughput=max(raw, 0.0),
        throughput_raw=raw,
        p_out=p_out,
        reliability=reliability(p_out),
        per_k=tuple(per_k),
        p_idle=p_idle)
    logger.debug("U=%d p_a=%g capture=%s: eps=%.6g T=%.6g P_out=%.6g",
                 protocol.U, protocol.p_a, protocol.capture,
                 report.epsilon, report.throughput, report.p_out)
    return report


def best_activation(p_grid, protocol, params, stats):
    """
    The point of `p_grid` that maximizes throughput, and that throughput.
    Ties go to the smallest `p_a`.
    """

    best = None
    for p in p_grid:
        point = dataclasses.replace(protocol, p_a=float(p))
        eps = unconditional_error(point, params, stats)
        t = max(_throughput(point, params, eps), 0.0)
        if best is None or t > best[1]:
            best = (float(p), t)
    if best is None:
        raise DomainError("best_activation: empty p_a grid")
    return best
