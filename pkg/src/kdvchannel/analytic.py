"""Closed-form reference profiles.

Two families: a traveling sech^2 hump used as a fit against measured and
simulated profiles (not an exact solution of the forced equation), and the
exponential radial decay of the wave amplitude away from the outer wall.
"""

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import KdvCoefficients
from .scenario import ValidationError


@dataclass(frozen=True)
class RadialDecayFit:
    """Parameters of the radial amplitude law A(r) = A_m e^(M r - beta1) + B."""

    amplitude: float
    wavenumber_m: float
    rossby_radius_beta1: float
    offset_b: float

    def __post_init__(self):
        if self.wavenumber_m <= 0.0:
            raise ValidationError(
                f"wavenumber_m must be positive, got {self.wavenumber_m}"
            )


def sech2_width_factor(coeffs: KdvCoefficients, r_max: float) -> float:
    """Argument scale sqrt(B omega r_max / (3 C)) of the sech^2 profile."""
    q = coeffs.b_nonlin * coeffs.omega * r_max / (3.0 * coeffs.c_time)
    if q < 0.0:
        raise ValidationError(f"negative radicand B*omega*r_max/(3C) = {q:.6g}")
    return math.sqrt(q)


def sech2_profile(theta, t: float, amplitude: float, coeffs: KdvCoefficients,
                  c_star: float, r_max: float):
    """Traveling hump A_m sech^2( sqrt(B omega r_max/(3C)) (theta/2 - c* t/(2C)) ).

    The crest sits at theta = c* t / C, so it translates linearly in time at
    rate c*/C. ``c_star`` is the dimensional transport speed; the solid-body
    speed r_max*omega is the conventional choice.
    """
    width = sech2_width_factor(coeffs, r_max)
    arg = width * (np.asarray(theta) / 2.0 - c_star * t / (2.0 * coeffs.c_time))
    return amplitude / np.cosh(arg) ** 2


def radial_wavenumber(beta: float) -> float:
    """Radial wavenumber M = pi / (1 - beta) for radius ratio beta = r_min/r_max."""
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"beta must be in (0, 1), got {beta}")
    return math.pi / (1.0 - beta)


def rossby_radius(depth: float, g: float, omega_wave: float) -> float:
    """Dimensionless Rossby radius beta1 = sqrt(g h) / omega.

    ``omega_wave`` is the local oscillation frequency, not its double.
    """
    if omega_wave <= 0.0:
        raise ValidationError(f"omega_wave must be positive, got {omega_wave}")
    if depth < 0.0:
        raise ValidationError(f"depth must be non-negative, got {depth}")
    return math.sqrt(g * depth) / omega_wave


def radial_decay_profile(r, fit: RadialDecayFit):
    """Amplitude at radius r under the exponential law A_m e^(M r - beta1) + B.

    The exponent mixes the dimensional radius with dimensionless M and
    beta1; it is evaluated literally as the fit defines it.
    """
    return (fit.amplitude
            * np.exp(fit.wavenumber_m * np.asarray(r) - fit.rossby_radius_beta1)
            + fit.offset_b)


def fit_radial_decay(r_samples, amplitude_samples, wavenumber_m: float,
                     beta1: float) -> tuple[RadialDecayFit, float]:
    """Least-squares (A_m, B) for fixed (M, beta1) against measured radial samples.

    Returns the fit and the RMS residual.
    """
    r = np.asarray(r_samples, dtype=float)
    a = np.asarray(amplitude_samples, dtype=float)
    if r.shape != a.shape or r.ndim != 1 or r.size < 2:
        raise ValidationError("need matching 1-d radius and amplitude samples")
    design = np.column_stack([np.exp(wavenumber_m * r - beta1), np.ones_like(r)])
    (amp, offset), *_ = np.linalg.lstsq(design, a, rcond=None)
    fit = RadialDecayFit(amplitude=float(amp), wavenumber_m=wavenumber_m,
                         rossby_radius_beta1=beta1, offset_b=float(offset))
    residual = radial_decay_profile(r, fit) - a
    return fit, float(np.sqrt(np.mean(residual**2)))
