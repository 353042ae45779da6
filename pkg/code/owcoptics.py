#!/usr/bin/env python

# owcoptics.py - cell geometry and line-of-sight optical channel

"""
Geometry, Lambertian channel gains, and the closed-form statistics of
the single-user SNR.

The access point (AP) hangs at height ``L`` over the centre of a disk
of radius ``D``; devices lie on the disk, uniformly in area,
with their LEDs pointing straight up and the photodetector pointing
straight down,
so the angle of irradiance equals the angle of incidence.
A device at radial distance ``r`` has channel gain::

  h(r) = X / (r**2 + L**2) ** ((m + 3) / 2)

where ``m`` is the Lambertian order of the LED and
``X`` collects everything that does not depend on ``r``
(it is constant only while every device is inside the receiver field of
view, which :class:`SystemConfig` insists on).
The SNR is ``gamma = mu * h**2`` with ``mu = (P_t * eta)**2 / (N0 * B)``.

Because ``r**2 / D**2`` is uniform on [0, 1] the SNR has a simple
closed-form density and distribution on [``gamma_min``, ``gamma_max``];
see :func:`snr_pdf` and :func:`snr_cdf`.

All functions here are pure; the dataclasses are frozen.
"""

import dataclasses
import logging
import math

import numpy

import owc
from owc import ConfigError, DomainError

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class OpticalFrontend:
    """
    Optical front end parameters, SI units, angles in radians.

    P_t
      transmitted optical power (W).
    eta
      optical-to-electrical conversion efficiency.
    A_r
      photodetector area (m²).
    R_r
      responsivity (A/W).
    T_s
      optical filter gain.
    zeta
      refractive index of the concentrator lens.
    Psi
      receiver field of view (rad), 0 < Psi <= pi/2.
    Phi_half
      LED semi-angle at half illuminance (rad), 0 < Phi_half < pi/2.
    N0
      noise power spectral density (W/Hz).
    B
      noise bandwidth (Hz).
    """

    P_t: float = 30e-3
    eta: float = 0.8
    A_r: float = 1e-4
    R_r: float = 0.4
    T_s: float = 1.0
    zeta: float = 1.5
    Psi: float = math.pi / 2
    Phi_half: float = math.pi / 3
    N0: float = 1e-21
    B: float = 200e3

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ConfigError(
                    "OpticalFrontend.%s:" % field.name,
                    "must be strictly positive, got %r" % value)
        if not self.Psi <= math.pi / 2:
            raise ConfigError(
                "OpticalFrontend.Psi:",
                "field of view must satisfy 0 < Psi <= 90 degrees,"
                " got %.6g degrees" % math.degrees(self.Psi))
        if not self.Phi_half < math.pi / 2:
            raise ConfigError(
                "OpticalFrontend.Phi_half:",
                "semi-angle must satisfy 0 < Phi_half < 90 degrees,"
                " got %.6g degrees" % math.degrees(self.Phi_half))


@dataclasses.dataclass(frozen=True)
class CellGeometry:
    """Coverage disk radius `D` and AP height `L`, both in metres."""

    D: float = 4.0
    L: float = 3.0

    def __post_init__(self):
        if not self.D > 0:
            raise ConfigError("CellGeometry.D:", "must be > 0")
        if not self.L > 0:
            raise ConfigError("CellGeometry.L:", "must be > 0")

    @property
    def max_incidence(self):
        """Largest angle of incidence in the cell (rad), at r = D."""
        return math.atan2(self.D, self.L)


@dataclasses.dataclass(frozen=True)
class SystemConfig:
    """
    Front end plus geometry.
    Construction checks the field-of-view invariant
    ``atan(D/L) <= Psi``:
    outside it some devices are not seen at all and
    the constant-``X`` form of the channel gain is wrong.
    """

    frontend: OpticalFrontend = OpticalFrontend()
    geometry: CellGeometry = CellGeometry()

    def __post_init__(self):
        edge = self.geometry.max_incidence
        if edge > self.frontend.Psi:
            raise ConfigError(
                "geometry:",
                "field-of-view invariant atan(D/L) <= Psi violated:"
                " atan(%g/%g) = %.4g degrees > Psi = %.4g degrees"
                % (self.geometry.D, self.geometry.L,
                   math.degrees(edge), math.degrees(self.frontend.Psi)))


@dataclasses.dataclass(frozen=True)
class DerivedConstants:
    """
    Quantities computed once from a :class:`SystemConfig`.

    `m` Lambertian order, `X` geometry constant,
    `sigma_n2` noise power, `mu` SNR scale,
    `gamma_min`/`gamma_max` and `h_min`/`h_max` the support of
    the SNR and of the channel gain.
    `D` and `L` are carried along for the closed forms.
    """

    m: float
    X: float
    sigma_n2: float
    mu: float
    gamma_min: float
    gamma_max: float
    h_min: float
    h_max: float
    D: float
    L: float

    @property
    def b(self):
        """The exponent 1/(m+3) that runs through every closed form."""
        return 1.0 / (self.m + 3.0)

    @property
    def scale(self):
        """
        ``(mu * X**2) ** (1/(m+3))``, so that
        ``gamma(r) = scale**(m+3) / (r**2 + L**2)**(m+3)``.
        """
        return (self.mu * self.X ** 2) ** self.b

    @property
    def pdf_coefficient(self):
        """The factor of ``gamma**-((m+4)/(m+3))`` in the SNR density."""
        return self.scale / (self.D ** 2 * (self.m + 3.0))


def lambertian_order(Phi_half):
    """
    Lambertian order ``m = -ln 2 / ln(cos Phi_half)`` of an LED with
    semi-angle at half illuminance `Phi_half` (radians).
    """

    c = math.cos(Phi_half)
    if not (0 < Phi_half < math.pi / 2 and 0 < c < 1):
        raise DomainError(
            "lambertian_order: need 0 < Phi_half < pi/2, got %r" % Phi_half)
    return -math.log(2.0) / math.log(c)


def concentrator_gain(psi, zeta, Psi):
    """
    Gain of the optical concentrator at incidence angle `psi`:
    ``zeta**2 / sin(Psi)**2`` inside the field of view `Psi`, 0 outside.
    """

    if 0 <= psi <= Psi:
        return zeta ** 2 / math.sin(Psi) ** 2
    return 0.0


def geometry_constant(frontend, geometry, m):
    """
    The placement-independent factor ``X`` of the channel gain.
    The concentrator gain is taken inside the field of view;
    :class:`SystemConfig` guarantees every device is there.
    """

    if geometry.max_incidence > frontend.Psi:
        raise ConfigError(
            "geometry:",
            "field-of-view invariant atan(D/L) <= Psi violated")
    g = concentrator_gain(0.0, frontend.zeta, frontend.Psi)
    return (frontend.A_r * (m + 1) * frontend.R_r / (2 * math.pi)
            * frontend.T_s * g * geometry.L ** (m + 1))


def derive_constants(system):
    """:class:`DerivedConstants` of `system`, a :class:`SystemConfig`."""

    fe = system.frontend
    geo = system.geometry
    m = lambertian_order(fe.Phi_half)
    X = geometry_constant(fe, geo, m)
    sigma_n2 = fe.N0 * fe.B
    mu = (fe.P_t * fe.eta) ** 2 / sigma_n2
    h_max = X / geo.L ** (m + 3)
    h_min = X / (geo.D ** 2 + geo.L ** 2) ** ((m + 3) / 2)
    constants = DerivedConstants(
        m=m, X=X, sigma_n2=sigma_n2, mu=mu,
        gamma_min=mu * h_min ** 2, gamma_max=mu * h_max ** 2,
        h_min=h_min, h_max=h_max, D=geo.D, L=geo.L)
    logger.debug("derived %r", constants)
    return constants


def channel_gain(r, constants):
    """
    Line-of-sight channel gain at radial distance `r` (scalar or array).
    Raises :class:`DomainError` if any `r` is outside [0, D].
    """

    r = numpy.asarray(r, dtype=float)
    if numpy.any(r < 0) or numpy.any(r > constants.D):
        raise DomainError(
            "channel_gain: radius must lie in [0, %g]" % constants.D)
    h = constants.X / (r ** 2 + constants.L ** 2) ** ((constants.m + 3) / 2)
    if h.ndim == 0:
        return float(h)
    return h


def snr(r, constants):
    """SNR ``mu * h(r)**2`` of a device at radial distance `r`."""
    return constants.mu * channel_gain(r, constants) ** 2


def snr_pdf(gamma, constants):
    """
    Density of the single-user SNR at `gamma` (scalar or array);
    zero outside [gamma_min, gamma_max].
    """

    gamma = numpy.asarray(gamma, dtype=float)
    inside = (gamma >= constants.gamma_min) & (gamma <= constants.gamma_max)
    safe = numpy.where(inside, gamma, 1.0)
    value = numpy.where(
        inside,
        constants.pdf_coefficient * safe ** (-1.0 - constants.b),
        0.0)
    if value.ndim == 0:
        return float(value)
    return value


def snr_cdf(gamma, constants):
    """
    Distribution function of the single-user SNR::

      F(gamma) = 1 + (L**2 - (mu X**2 / gamma) ** (1/(m+3))) / D**2

    on the support, 0 below it and 1 above it.
    """

    gamma = numpy.asarray(gamma, dtype=float)
    lo, hi = constants.gamma_min, constants.gamma_max
    safe = numpy.clip(gamma, lo, hi)
    inner = 1.0 + (constants.L ** 2
                   - constants.scale * safe ** -constants.b) / constants.D ** 2
    value = numpy.clip(numpy.where(gamma < lo, 0.0,
                                   numpy.where(gamma > hi, 1.0, inner)),
                       0.0, 1.0)
    if value.ndim == 0:
        return float(value)
    return value


def snr_moment(k, constants):
    """``E[gamma**k]`` by adaptive quadrature over the support."""

    return owc.integrate(
        lambda g: g ** k * snr_pdf(g, constants),
        constants.gamma_min, constants.gamma_max)


def snr_mean(constants):
    """Mean single-user SNR."""
    return snr_moment(1, constants)


def sample_radius(u, D):
    """
    Map uniform `u` in [0, 1] to a radial distance ``D * sqrt(u)``;
    uniform `u` gives devices uniform in area over the disk.
    """

    r = D * numpy.sqrt(u)
    if numpy.ndim(r) == 0:
        return float(r)
    return r
