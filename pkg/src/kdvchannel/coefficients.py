"""Dimensional coefficients of the forced wave equation on the ring.

The evolution equation has the form

    A eta_ttt(theta) + B eta eta_theta + C eta_t + D0 sin(theta - omega t) = 0

with A the dispersion coefficient, B the nonlinearity coefficient, C the
time coefficient, and D0 the forcing amplitude from the tilted, precessing
table. The radius-dependent factors are evaluated at one radius ``r_eval``
(the outer wall by default, where the wave rides).
"""

import math
from dataclasses import dataclass

from .scenario import GRAVITY, DerivedScales, Scenario, ValidationError


@dataclass(frozen=True)
class KdvCoefficients:
    a_disp: float
    b_nonlin: float
    c_time: float
    d_forcing_amp: float
    omega: float
    r_eval: float


def compute_coefficients(scenario: Scenario, scales: DerivedScales,
                         r_eval: float | None = None) -> KdvCoefficients:
    """Evaluate A, B, C, D0 for one operating point.

    With H the mean depth, lam the wavelength, c the long-wave speed,
    om_bar = omega*lam/c the dimensionless rotation rate and
    r_bar = r_eval/lam:

        A  = (om_bar / (2 r_bar^2) - 1 / (6 om_bar r_bar^4)) / (eps H)
        B  = 3 / ((eps H)^2 (lam/c) r_bar^2)
        C  = 2 lam / (eps^2 c H)
        D0 = tau omega r_eval / (eps sigma c)

    An untilted channel (tau = 0) has zero forcing amplitude.
    """
    if scales.epsilon <= 0.0:
        raise ValidationError(f"epsilon must be positive, got {scales.epsilon}")
    if scenario.omega <= 0.0:
        raise ValidationError(f"omega must be positive, got {scenario.omega}")
    r = scenario.geometry.r_max if r_eval is None else r_eval
    eps = scales.epsilon
    depth = scales.mean_depth
    lam = scales.wavelength
    c = scales.long_wave_speed
    om_bar = scenario.omega * lam / c
    r_bar = r / lam
    eps_h = eps * depth
    a_disp = (om_bar / (2.0 * r_bar**2) - 1.0 / (6.0 * om_bar * r_bar**4)) / eps_h
    b_nonlin = 3.0 / (eps_h**2 * (lam / c) * r_bar**2)
    c_time = 2.0 * lam / (eps**2 * c * depth)
    d_forcing_amp = scenario.tilt_tau * scenario.omega * r / (eps * scales.sigma * c)
    return KdvCoefficients(
        a_disp=a_disp,
        b_nonlin=b_nonlin,
        c_time=c_time,
        d_forcing_amp=d_forcing_amp,
        omega=scenario.omega,
        r_eval=r,
    )


def dispersion_relation(k: float, coeffs: KdvCoefficients, c: float) -> float:
    """Frequency of a small linear harmonic with wavenumber k: (k - A k^3) / c.

    ``c`` is the divisor of the time term; pass ``coeffs.c_time`` to get the
    frequency the explicit solver propagates.
    """
    return (k - coeffs.a_disp * k**3) / c


def theoretical_wave_speed(depth: float, amplitude: float,
                           g: float = GRAVITY) -> float:
    """Amplitude-corrected long-wave speed sqrt(g h) (1 + A/(2h))."""
    if depth <= 0.0:
        raise ValidationError(f"depth must be positive, got {depth}")
    if amplitude < 0.0:
        raise ValidationError(f"amplitude must be non-negative, got {amplitude}")
    return math.sqrt(g * depth) * (1.0 + 0.5 * amplitude / depth)
