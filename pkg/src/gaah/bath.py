"""Ohmic-family environment: spectral density, memory kernel, self-energy.

The bath enters the dynamics only through the spectral density

    J(w) = eta * w * (w / omega_c)^(s-1) * exp(-w / omega_c),

its Fourier transform (the memory kernel), and the regularized level-shift
integral int_0^inf J(w) / (E - w) dw that dresses the lattice spectrum.  For
E > 0 the integrand is singular and the integral is defined through the
Cauchy principal value plus a residue term -i*c*J(E).  The textbook
half-residue limit gives c = pi; an alternative convention with c = pi/2 is
kept selectable because published reference data for this system was fitted
best by one of the two (see :class:`ResiduePrescription`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import expi, gamma

from .errors import NumericsError, ParameterError

#: Upper integration limit of the level-shift integral, in units of omega_c.
#: Beyond it the exponential tail is handled by a separate quadrature.
CUTOFF_MULTIPLE = 40.0

#: Guard range for self-energy evaluation, in units of omega_c.
ENERGY_GUARD_MULTIPLE = 10.0

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=400)


@dataclass(frozen=True)
class BathParams:
    """Coupling strength ``eta`` (dimensionless), spectral cutoff ``omega_c``
    and Ohmicity exponent ``s`` (s = 1 is the Ohmic case)."""

    eta: float = 0.1
    omega_c: float = 10.0
    s: float = 1.0

    def __post_init__(self):
        if self.eta < 0.0:
            raise ParameterError(f"bath.eta must be >= 0, got {self.eta}")
        if self.omega_c <= 0.0:
            raise ParameterError(f"bath.omega_c must be > 0, got {self.omega_c}")
        if self.s <= 0.0:
            raise ParameterError(f"bath.s must be > 0, got {self.s}")


class ResiduePrescription(enum.Enum):
    """Residue coefficient of the regularized level-shift integral.

    HALF takes Im = -(pi/2) J(E), FULL the standard -pi J(E).  Exactly one
    variant is active per run and is recorded in all output metadata.
    """

    HALF = "half"
    FULL = "full"

    @property
    def residue_factor(self) -> float:
        return 0.5 * math.pi if self is ResiduePrescription.HALF else math.pi


def spectral_density(b: BathParams, omega):
    """J(omega) for scalar or array ``omega`` >= 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0.0):
        raise ParameterError("spectral density is defined for omega >= 0 only")
    # Written as eta * omega_c^(1-s) * w^s * exp(...) so w = 0 is exact for any s > 0.
    out = b.eta * b.omega_c ** (1.0 - b.s) * w ** b.s * np.exp(-w / b.omega_c)
    return out if out.ndim else float(out)


def _spectral_density_slope(b: BathParams, omega: float) -> float:
    """dJ/domega, used to desingularize the subtracted integrand."""
    w = float(omega)
    e = math.exp(-w / b.omega_c)
    return b.eta * b.omega_c ** (1.0 - b.s) * e * (b.s * w ** (b.s - 1.0) - w ** b.s / b.omega_c)


def spectral_weight(b: BathParams, omega_max: float = math.inf) -> float:
    """int_0^omega_max J(w) dw; for s = 1 and omega_max = inf this is
    eta * omega_c**2."""
    val, _ = quad(lambda w: spectral_density(b, w), 0.0, omega_max,
                  points=[b.omega_c] if math.isfinite(omega_max) else None,
                  **_QUAD_OPTS)
    return val


def memory_kernel(b: BathParams, t, omega_max: float = math.inf):
    """Bath correlation function f(t) = int_0^omega_max J(w) exp(-i w t) dw.

    For the full support (the default) this is, in closed form,

        f(t) = eta / omega_c^(s-1) * Gamma(s+1) / (i t + 1/omega_c)^(s+1),

    with f(0) = eta * Gamma(s+1) * omega_c**2.  A finite ``omega_max``
    (s = 1 only) truncates the bath at that frequency, which makes the
    kernel physically identical to a mode sampling of [0, omega_max]; the
    discrete-bath comparison uses this so that it measures solver error
    rather than the spectral weight above the sampling window.  Accepts
    scalar or array ``t`` >= 0.
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise ParameterError("memory kernel is defined for t >= 0")
    z = 1j * tt + 1.0 / b.omega_c
    if math.isinf(omega_max):
        amp = b.eta / b.omega_c ** (b.s - 1.0) * gamma(b.s + 1.0)
        out = amp / z ** (b.s + 1.0)
    else:
        if b.s != 1.0:
            raise ParameterError("truncated memory kernel is closed-form for s = 1 only")
        if omega_max <= 0.0:
            raise ParameterError(f"omega_max must be > 0, got {omega_max}")
        zw = z * omega_max
        out = b.eta * (1.0 - np.exp(-zw) * (1.0 + zw)) / z ** 2
    return out if out.ndim else complex(out)


def memory_kernel_integral(b: BathParams, t) -> np.ndarray:
    """int_0^t f(u) du in closed form; enters the memoryless solver mode."""
    tt = np.asarray(t, dtype=float)
    amp = b.eta / b.omega_c ** (b.s - 1.0) * gamma(b.s + 1.0)
    bb = 1.0 / b.omega_c
    out = amp * (1j / b.s) * ((1j * tt + bb) ** (-b.s) - bb ** (-b.s))
    return out if out.ndim else complex(out)


def _checked_quad(f, lo, hi, **kw):
    out = quad(f, lo, hi, full_output=1, **kw)
    val, abserr = out[0], out[1]
    if len(out) > 3 and abserr > 1e-9:
        raise NumericsError(
            f"self-energy quadrature did not converge on [{lo}, {hi}]: "
            f"{out[3]!s} (achieved error estimate {abserr:.3e})"
        )
    return val


@lru_cache(maxsize=16384)
def _dispersive_part(eta: float, omega_c: float, s: float, x: float) -> float:
    """Real (principal-value) part of int_0^inf J(w)/(x - w) dw at real x.

    For x > 0 the singularity is subtracted:

        P int_0^W J/(x-w) = int_0^W [J(w)-J(x)]/(x-w) + J(x) * ln(x/(W-x)),

    with W = 40*omega_c; the first integrand is smooth (removable singularity
    with value -J'(x)) and the exponentially small tail beyond W is added by a
    separate quadrature.
    """
    b = BathParams(eta=eta, omega_c=omega_c, s=s)
    W = CUTOFF_MULTIPLE * omega_c
    if x <= 0.0:
        main = _checked_quad(lambda w: spectral_density(b, w) / (x - w),
                             0.0, W, points=[omega_c], **_QUAD_OPTS)
    else:
        jx = spectral_density(b, x)
        slope = _spectral_density_slope(b, x)
        h = 1e-5 * (1.0 + x)
        curv = (_spectral_density_slope(b, x + h) - _spectral_density_slope(b, x - h)) / (2.0 * h)

        def subtracted(w):
            d = x - w
            if abs(d) < 1e-7 * (1.0 + x):
                # Taylor of [J(x-d) - J(x)]/d to dodge cancellation at the node.
                return -slope + 0.5 * d * curv
            return (spectral_density(b, w) - jx) / d

        pts = sorted({min(max(x, 1e-12), W - 1e-12), omega_c})
        main = _checked_quad(subtracted, 0.0, W, points=pts, **_QUAD_OPTS)
        main += jx * math.log(x / (W - x))
    tail = _checked_quad(lambda w: spectral_density(b, w) / (x - w),
                         W, math.inf, **_QUAD_OPTS)
    return main + tail


def self_energy(b: BathParams, E: complex,
                p: ResiduePrescription = ResiduePrescription.HALF) -> complex:
    """Regularized level-shift integral evaluated on the real axis.

    The integral is taken at x = Re(E) (the resonance imaginary parts this
    feeds are tiny, so the real-axis value is the working definition); for
    x > 0 the residue term -i * c * J(x) is added with c set by ``p``.  The
    imaginary part is therefore <= 0 whenever eta > 0.
    """
    x = float(np.real(E))
    if abs(x) > ENERGY_GUARD_MULTIPLE * b.omega_c:
        raise ParameterError(
            f"Re(E) = {x} outside guard range +-{ENERGY_GUARD_MULTIPLE * b.omega_c}"
        )
    if b.eta == 0.0:
        return 0.0 + 0.0j
    value = complex(_dispersive_part(b.eta, b.omega_c, b.s, x))
    if x > 0.0:
        value -= 1j * p.residue_factor * spectral_density(b, x)
    return value


def self_energy_closed_form(b: BathParams, E: complex,
                            p: ResiduePrescription = ResiduePrescription.HALF,
                            continue_in_E: bool = False) -> complex:
    """Exponential-integral closed form of the s = 1 self-energy.

    For real E the principal-value part reduces to

        eta * (E * exp(-E/omega_c) * Ei(E/omega_c) - omega_c),

    which serves as an independent check of the subtraction quadrature.  With
    ``continue_in_E`` the same expression is evaluated at complex E (with the
    residue term built from the analytically continued spectral density), a
    sensitivity knob for the real-axis working definition.
    """
    if b.s != 1.0:
        raise ParameterError("closed form is available for s = 1 only")
    if b.eta == 0.0:
        return 0.0 + 0.0j
    z = complex(E) if continue_in_E else complex(float(np.real(E)))
    if abs(z.real) > ENERGY_GUARD_MULTIPLE * b.omega_c:
        raise ParameterError(
            f"Re(E) = {z.real} outside guard range +-{ENERGY_GUARD_MULTIPLE * b.omega_c}"
        )
    u = z / b.omega_c
    if z == 0.0:
        disp = -b.eta * b.omega_c
    else:
        disp = b.eta * (z * np.exp(-u) * expi(u) - b.omega_c)
    value = complex(disp)
    if z.real > 0.0:
        j = b.eta * z * np.exp(-u) if continue_in_E else spectral_density(b, z.real)
        value -= 1j * p.residue_factor * j
    return value


class SigmaMode(enum.Enum):
    """How the self-energy is evaluated at complex E during root finding.

    REAL_AXIS pins the integral to x = Re(E); valid for any s, exact for
    narrow resonances, and the only choice for Re(E) <= 0.  CONTINUED
    evaluates the s = 1 closed form at complex E, which stays faithful for
    broad resonances as well; it requires Re(E) > 0 (the exponential
    integral's branch cut sits on the negative real axis).  AUTO picks
    CONTINUED whenever it is available.
    """

    REAL_AXIS = "real-axis"
    CONTINUED = "continued"
    AUTO = "auto"

    def resolve(self, b: BathParams) -> "SigmaMode":
        if self is not SigmaMode.AUTO:
            return self
        return SigmaMode.CONTINUED if b.s == 1.0 else SigmaMode.REAL_AXIS


def self_energy_eval(b: BathParams, E: complex,
                     p: ResiduePrescription = ResiduePrescription.HALF,
                     mode: SigmaMode = SigmaMode.AUTO) -> complex:
    """Self-energy at (possibly complex) E under the chosen evaluation mode."""
    mode = mode.resolve(b)
    if mode is SigmaMode.REAL_AXIS:
        return self_energy(b, E, p)
    if b.s != 1.0:
        raise ParameterError("continued self-energy requires s = 1")
    if b.eta != 0.0 and complex(E).real <= 0.0:
        raise ParameterError(
            f"continued self-energy needs Re(E) > 0, got {E}; use REAL_AXIS")
    return self_energy_closed_form(b, E, p, continue_in_E=True)
