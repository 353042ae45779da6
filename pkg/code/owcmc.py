#!/usr/bin/env python

# owcmc.py - Monte Carlo oracle for the slotted ALOHA analysis

"""
Monte Carlo simulation of slots, end to end:
draw the number of active devices, drop each one uniformly on the
disk, compute gains, SNRs, and the SINR of a reference user chosen
uniformly among the active ones.

:func:`simulate_slot` does one slot with a caller's generator.
:func:`simulate` does many, in blocks of :data:`BLOCK` slots.
Block ``b`` draws from its own Philox stream seeded with
``SeedSequence([seed, b])``,
so a run is reproducible from its seed
whatever the number of worker threads.
Changing any of this changes the numbers;
:data:`RNG_VERSION` names the scheme and is written into sample dumps.

:func:`estimate_metrics` turns samples into a
:class:`owcaloha.MetricsReport` with standard errors.
"""

import collections
import concurrent.futures
import dataclasses
import logging
import math

import numpy

import owc
import owcaloha
import owcfbl
import owcoptics
from owc import ConfigError, DomainError

logger = logging.getLogger(__name__)

RNG_VERSION = "philox4x64-seedsequence-block65536-v1"
BLOCK = 65536

SlotSample = collections.namedtuple(
    'SlotSample', 'u_a reference_gamma interference_sum sinr')


class Empty:
    """Marker returned by :func:`simulate_slot` for a slot nobody uses."""


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """
    `n_slots` slots from `seed`.
    `u_a`, when given, fixes the number of active devices in every slot
    (a conditioned run).
    """

    n_slots: int
    seed: int
    u_a: int = None

    def __post_init__(self):
        if not self.n_slots >= 1:
            raise ConfigError(
                "run.n_slots:", "must be >= 1, got %r" % self.n_slots)
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(
                "run.seed:", "must be a 64-bit unsigned integer")
        if self.u_a is not None and self.u_a < 1:
            raise ConfigError("run.u_a:", "must be >= 1")


@dataclasses.dataclass(frozen=True, eq=False)
class SampleSet:
    """
    Column arrays, one entry per slot.
    Empty slots have ``u_a == 0`` and NaN in the float columns.
    """

    u_a: numpy.ndarray
    reference_gamma: numpy.ndarray
    interference_sum: numpy.ndarray
    sinr: numpy.ndarray

    def __len__(self):
        return self.u_a.size

    @property
    def active(self):
        return self.u_a > 0

    @property
    def activity_frequency(self):
        return float(numpy.mean(self.active))

    def slot(self, i):
        """Slot `i` as a :class:`SlotSample`, or :class:`Empty`."""

        if self.u_a[i] == 0:
            return Empty
        return SlotSample(int(self.u_a[i]), float(self.reference_gamma[i]),
                          float(self.interference_sum[i]),
                          float(self.sinr[i]))


def simulate_slot(rng, constants, protocol, u_a=None):
    """
    One slot.
    Returns a :class:`SlotSample`, or :class:`Empty` when no device
    is active.
    """

    if u_a is None:
        u_a = int(rng.binomial(protocol.U, protocol.p_a))
    if u_a == 0:
        return Empty
    radii = owcoptics.sample_radius(rng.random(u_a), constants.D)
    gammas = numpy.atleast_1d(owcoptics.snr(radii, constants))
    ref = int(rng.integers(u_a))
    interference = float(numpy.sum(numpy.delete(gammas, ref)))
    reference = float(gammas[ref])
    return SlotSample(u_a, reference, interference,
                      reference / (interference + 1.0))


def block_generator(seed, block):
    """The generator of block number `block`."""
    return numpy.random.Generator(
        numpy.random.Philox(numpy.random.SeedSequence([seed, block])))


def _simulate_block(constants, protocol, sim, block):
    rng = block_generator(sim.seed, block)
    n = min(BLOCK, sim.n_slots - block * BLOCK)
    if sim.u_a is None:
        u = rng.binomial(protocol.U, protocol.p_a, size=n)
    else:
        u = numpy.full(n, sim.u_a)
    u = u.astype(numpy.int64)
    total = int(u.sum())
    gammas = owcoptics.snr(
        owcoptics.sample_radius(rng.random(total), constants.D), constants)
    gammas = numpy.atleast_1d(numpy.asarray(gammas, dtype=float))
    ref = rng.integers(0, numpy.maximum(u, 1))

    reference = numpy.full(n, math.nan)
    interference = numpy.full(n, math.nan)
    active = u > 0
    if total:
        starts = numpy.cumsum(u) - u
        index = starts[active] + ref[active]
        reference[active] = gammas[index]
        others = gammas.copy()
        others[index] = 0.0
        interference[active] = numpy.add.reduceat(others, starts[active])
    sinr = reference / (interference + 1.0)
    return u, reference, interference, sinr


def simulate(constants, protocol, sim, workers=None):
    """
    Run `sim` (a :class:`SimConfig`) and return a :class:`SampleSet`.
    `workers` threads share the blocks; the result does not depend on it.
    """

    blocks = range((sim.n_slots + BLOCK - 1) // BLOCK)
    with concurrent.futures.ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(
            lambda b: _simulate_block(constants, protocol, sim, b), blocks))
    columns = [numpy.concatenate(c) for c in zip(*parts)]
    logger.debug("simulated %d slots, seed %d, %s",
                 sim.n_slots, sim.seed, RNG_VERSION)
    return SampleSet(*(owc.frozen(c, dtype=c.dtype) for c in columns))


def empirical_cdf(samples, grid):
    """Fraction of `samples` at or below each point of `grid`."""

    s = numpy.sort(numpy.asarray(samples, dtype=float).ravel())
    if s.size == 0:
        raise DomainError("empirical_cdf: no samples")
    return numpy.searchsorted(s, grid, side='right') / s.size


def _mean_se(values):
    n = values.size
    mean = float(numpy.mean(values))
    if n < 2:
        return mean, 0.0
    return mean, float(numpy.std(values, ddof=1) / math.sqrt(n))


def estimate_metrics(samples, fbl, gamma_th=None, capture=True):
    """
    Empirical counterpart of :func:`owcaloha.evaluate`
    from a :class:`SampleSet`.
    Every metric is a mean over slots
    (empty slots contribute zero error and zero outage),
    reported with its standard error.
    Without capture only slots with a single active device count.
    """

    if len(samples) == 0:
        raise DomainError("estimate_metrics: no samples")
    if gamma_th is None:
        gamma_th = owcfbl.sinr_threshold(fbl)
    if capture:
        useful = samples.active
    else:
        useful = samples.u_a == 1
    sinr = numpy.where(useful, samples.sinr, 1.0)
    error = numpy.where(useful, owcfbl.error_prob_instant(sinr, fbl), 0.0)
    outage = (useful & (sinr < gamma_th)).astype(float)
    per_slot_t = fbl.R * (useful.astype(float) - error)

    epsilon, se_epsilon = _mean_se(error)
    p_out, se_p_out = _mean_se(outage)
    raw, se_t = _mean_se(per_slot_t)

    per_k = []
    counts = samples.u_a[useful]
    for k in numpy.unique(counts):
        mask = samples.u_a == k
        per_k.append(owcaloha.KTerm(
            int(k), float(numpy.mean(mask)), float(numpy.mean(error[mask])),
            float(numpy.mean(outage[mask]))))
    return owcaloha.MetricsReport(
        epsilon=epsilon,
        throughput=max(raw, 0.0),
        throughput_raw=raw,
        p_out=p_out,
        reliability=owcaloha.reliability(p_out),
        per_k=tuple(per_k),
        p_idle=float(numpy.mean(samples.u_a == 0)),
        se_epsilon=se_epsilon,
        se_throughput=se_t,
        se_p_out=se_p_out)


def dump_samples(samples, path):
    """
    Write the ``(u_a, sinr)`` pairs of the active slots to `path`:
    a ``.npy`` file, or space-separated text with a ``#`` header.
    """

    active = samples.active
    if str(path).endswith('.npy'):
        record = numpy.empty(int(active.sum()),
                             dtype=[('u_a', 'i8'), ('sinr', 'f8')])
        record['u_a'] = samples.u_a[active]
        record['sinr'] = samples.sinr[active]
        numpy.save(path, record)
        return
    with open(path, 'w') as out:
        out.write("# u_a sinr %s\n" % RNG_VERSION)
        for k, x in zip(samples.u_a[active], samples.sinr[active]):
            out.write("%d %.17g\n" % (k, x))
