"""Flow-regime numbers, the breaking criterion, and wave-speed comparison.

All regime numbers use the hydraulic radius of the rectangular channel
cross-section as the characteristic length. The Rossby number is reported
in both conventions found for this system (precession-rate numerator and
rotation-rate numerator); they sum to 1/2 identically.
"""

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ChannelGeometry, DerivedScales, Scenario, ValidationError
from .solver import WaveState

REYNOLDS_LAMINAR_MAX = 500.0
REYNOLDS_TURBULENT_MIN = 1000.0

BREAKING_MARGIN = 0.05  # amplitude within 5% of the depth counts as breaking


@dataclass(frozen=True)
class HydraulicSection:
    hydraulic_radius: float
    wetted_perimeter: float


@dataclass(frozen=True)
class ReynoldsReport:
    value: float
    regime: str  # laminar | transitional | turbulent


@dataclass(frozen=True)
class RossbyNumbers:
    """Both numerator conventions of R_o = (.)/(2 (Omega1 + Omega))."""

    precession: float  # Omega1 / (2 (Omega1 + Omega)) = tau / (2 (1 + tau))
    rotation: float    # Omega  / (2 (Omega1 + Omega)) = 1 / (2 (1 + tau))


@dataclass(frozen=True)
class FroudeReport:
    value: float
    critical: str  # sub | super


@dataclass(frozen=True)
class DiagnosticsReport:
    hydraulic_radius: float
    wetted_perimeter: float
    reynolds: float
    regime: str
    rossby_precession: float
    rossby_rotation: float
    ekman: float
    froude: float
    critical: str
    breaking: bool


def hydraulic_radius(geometry: ChannelGeometry, depth: float) -> HydraulicSection:
    """R_h = (width * depth) / (width + 2 depth) for the rectangular section."""
    if depth <= 0.0:
        raise ValidationError(f"depth must be positive, got {depth}")
    width = geometry.width
    wetted = width + 2.0 * depth
    return HydraulicSection(hydraulic_radius=width * depth / wetted,
                            wetted_perimeter=wetted)


def reynolds(omega: float, r_h: float, nu: float) -> ReynoldsReport:
    """Open-channel Reynolds number omega R_h^2 / nu with regime label."""
    if nu <= 0.0:
        raise ValidationError(f"nu must be positive, got {nu}")
    value = omega * r_h**2 / nu
    if value <= REYNOLDS_LAMINAR_MAX:
        regime = "laminar"
    elif value >= REYNOLDS_TURBULENT_MIN:
        regime = "turbulent"
    else:
        regime = "transitional"
    return ReynoldsReport(value=value, regime=regime)


def rossby_number(tau: float, omega: float) -> RossbyNumbers:
    """Inertial-to-Coriolis ratio in both conventions; they sum to 1/2."""
    if tau < 0.0:
        raise ValidationError(f"tau must be non-negative, got {tau}")
    if omega <= 0.0:
        raise ValidationError(f"omega must be positive, got {omega}")
    denom = 2.0 * (tau * omega + omega)
    return RossbyNumbers(precession=tau * omega / denom, rotation=omega / denom)


def ekman(nu: float, omega: float, r_h: float) -> float:
    """Viscous-to-Coriolis ratio nu / (omega R_h^2); the reciprocal of Reynolds."""
    if nu <= 0.0 or omega <= 0.0 or r_h <= 0.0:
        raise ValidationError("nu, omega, and r_h must all be positive")
    return nu / (omega * r_h**2)


def froude(geometry: ChannelGeometry, omega: float, depth: float,
           g: float) -> FroudeReport:
    """Froude number r_max omega / sqrt(g h); supercritical when above 1."""
    if depth <= 0.0:
        raise ValidationError(f"depth must be positive, got {depth}")
    value = geometry.r_max * omega / math.sqrt(g * depth)
    return FroudeReport(value=value, critical="super" if value > 1.0 else "sub")


def breaking_check(amplitude: float, depth: float,
                   margin: float = BREAKING_MARGIN) -> bool:
    """Russell criterion: the wave breaks when its amplitude reaches the depth."""
    if depth <= 0.0:
        raise ValidationError(f"depth must be positive, got {depth}")
    return amplitude >= depth * (1.0 - margin)


def crest_location(state: WaveState) -> tuple[float, float]:
    """Sub-cell crest position and height via a parabola through the argmax.

    Ties in the raw argmax break toward the lowest index. A flat profile has
    no crest and raises.
    """
    eta = state.eta
    n = state.grid.n_points
    j = int(np.argmax(eta))
    ym = eta[(j - 1) % n]
    y0 = eta[j]
    yp = eta[(j + 1) % n]
    curvature = ym - 2.0 * y0 + yp
    if float(np.max(eta)) == float(np.min(eta)):
        raise ValidationError("flat profile has no unique crest")
    if curvature == 0.0:
        return float(state.grid.theta[j]), float(y0)
    offset = 0.5 * (ym - yp) / curvature
    position = float(state.grid.theta[j] + offset * state.grid.d_theta)
    height = float(y0 - 0.25 * (ym - yp) * offset)
    return position, height


def crest_speed(snap_a: WaveState, snap_b: WaveState, r_max: float) -> float:
    """Azimuthal crest transport speed r_max * dtheta_crest / dt between snapshots.

    The crest displacement is wrapped to the shorter way around the ring.
    """
    if snap_b.time <= snap_a.time:
        raise ValidationError("snap_b must be later than snap_a")
    pos_a, _ = crest_location(snap_a)
    pos_b, _ = crest_location(snap_b)
    d_theta = float(snap_a.grid.wrap(pos_b - pos_a))
    return r_max * d_theta / (snap_b.time - snap_a.time)


def compare_speeds(c_th: float, c_exp: float) -> float:
    """Relative speed mismatch |c_th - c_exp| / c_exp."""
    if c_exp == 0.0:
        raise ValidationError("c_exp must be non-zero")
    return abs(c_th - c_exp) / abs(c_exp)


def build_report(scenario: Scenario, scales: DerivedScales) -> DiagnosticsReport:
    """Assemble the full regime report for one operating point.

    The breaking flag uses the scenario's measured amplitude when present;
    without one it stays False.
    """
    section = hydraulic_radius(scenario.geometry, scales.mean_depth)
    rey = reynolds(scenario.omega, section.hydraulic_radius, scenario.fluid.nu)
    ros = rossby_number(scenario.tilt_tau, scenario.omega)
    ek = ekman(scenario.fluid.nu, scenario.omega, section.hydraulic_radius)
    fr = froude(scenario.geometry, scenario.omega, scales.mean_depth,
                scenario.fluid.g)
    breaking = False
    if scenario.measured_amplitude is not None:
        breaking = breaking_check(scenario.measured_amplitude, scales.mean_depth)
    return DiagnosticsReport(
        hydraulic_radius=section.hydraulic_radius,
        wetted_perimeter=section.wetted_perimeter,
        reynolds=rey.value,
        regime=rey.regime,
        rossby_precession=ros.precession,
        rossby_rotation=ros.rotation,
        ekman=ek,
        froude=fr.value,
        critical=fr.critical,
        breaking=breaking,
    )
