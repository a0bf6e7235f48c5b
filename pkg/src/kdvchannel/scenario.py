"""Channel geometry, operating conditions, and derived shallow-water scales.

Everything here is an immutable value object; derived quantities are either
properties (so the defining relations hold by construction) or produced by
the pure functions below.
"""

import math
from dataclasses import dataclass

GRAVITY = 9.81            # m/s^2
WATER_VISCOSITY = 1.03e-6  # m^2/s, kinematic
WATER_DENSITY = 998.0     # kg/m^3

SHALLOWNESS_LIMIT = 0.15  # sigma below this counts as a long wave

EPSILON_MODES = ("sigma2", "amplitude_ratio")


class ValidationError(ValueError):
    """An input violates a physical or geometric constraint."""


@dataclass(frozen=True)
class ChannelGeometry:
    """Annular open channel between two concentric cylinder walls.

    Lengths in meters. ``z0`` is the elevation of the channel bottom above
    the table; it does not enter any of the flow formulas.
    """

    r_max: float
    r_min: float
    wall_height: float
    z0: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.r_min < self.r_max):
            raise ValidationError(
                f"need 0 < r_min < r_max, got r_min={self.r_min}, r_max={self.r_max}"
            )
        if self.wall_height <= 0.0:
            raise ValidationError(f"wall_height must be positive, got {self.wall_height}")

    @property
    def half_width_b(self) -> float:
        return 0.5 * (self.r_max - self.r_min)

    @property
    def width(self) -> float:
        return self.r_max - self.r_min

    @property
    def beta(self) -> float:
        """Radial ratio r_min/r_max."""
        return self.r_min / self.r_max

    @property
    def base_area(self) -> float:
        """Annulus floor area pi*(r_max^2 - r_min^2)."""
        return math.pi * (self.r_max**2 - self.r_min**2)

    @property
    def max_volume(self) -> float:
        return self.base_area * self.wall_height


@dataclass(frozen=True)
class FluidProperties:
    g: float = GRAVITY
    nu: float = WATER_VISCOSITY
    rho: float = WATER_DENSITY

    def __post_init__(self):
        for name in ("g", "nu", "rho"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class Scenario:
    """One operating point of the channel.

    ``tilt_tau`` is the slope of the tilted table, ``omega`` the table
    rotation rate; their product is the precession rate. ``epsilon_mode``
    selects how the nonlinearity parameter is closed: ``sigma2`` (the
    long-wave balance epsilon = sigma^2) or ``amplitude_ratio``
    (epsilon = amplitude / mean depth, requires ``measured_amplitude``).
    """

    geometry: ChannelGeometry
    fluid: FluidProperties
    volume: float
    tilt_tau: float
    omega: float
    measured_amplitude: float | None = None
    epsilon_mode: str = "sigma2"

    def __post_init__(self):
        if self.volume < 0.0:
            raise ValidationError(f"volume must be non-negative, got {self.volume}")
        if self.volume > self.geometry.max_volume:
            raise ValidationError(
                f"volume {self.volume} m^3 overfills the channel "
                f"(max {self.geometry.max_volume:.6g} m^3)"
            )
        if self.tilt_tau < 0.0:
            raise ValidationError(f"tilt_tau must be non-negative, got {self.tilt_tau}")
        if self.omega <= 0.0:
            raise ValidationError(f"omega must be positive, got {self.omega}")
        if self.epsilon_mode not in EPSILON_MODES:
            raise ValidationError(
                f"epsilon_mode must be one of {EPSILON_MODES}, got {self.epsilon_mode!r}"
            )
        if self.epsilon_mode == "amplitude_ratio" and not self.measured_amplitude:
            raise ValidationError("epsilon_mode=amplitude_ratio needs measured_amplitude")
        if self.measured_amplitude is not None and self.measured_amplitude <= 0.0:
            raise ValidationError(
                f"measured_amplitude must be positive, got {self.measured_amplitude}"
            )

    @property
    def precession_rate(self) -> float:
        return self.tilt_tau * self.omega


@dataclass(frozen=True)
class DerivedScales:
    """Length, speed, and smallness scales of one scenario.

    mean_depth        h = V / base area
    wavelength        horizontal scale, the outer periphery 2*pi*r_max
    long_wave_speed   c = sqrt(g h)
    sigma             depth-to-wavelength ratio h / wavelength
    epsilon           nonlinearity parameter (sigma^2 or amplitude/h)
    solid_body_speed  r_max * omega, the crest transport speed
    """

    mean_depth: float
    wavelength: float
    long_wave_speed: float
    sigma: float
    epsilon: float
    solid_body_speed: float


@dataclass(frozen=True)
class PlanarityReport:
    """Outcome of the narrow-channel (two-dimensionality) test b <= h^2/A."""

    threshold: float
    half_width_b: float
    satisfied: bool


@dataclass(frozen=True)
class ShallownessReport:
    sigma: float
    threshold: float
    satisfied: bool


def mean_depth_from_volume(volume: float, geometry: ChannelGeometry) -> float:
    """Mean water depth for a given fill volume, h = V / (pi (r_max^2 - r_min^2)).

    The annulus floor is flat, so volume and mean depth are in one-to-one
    correspondence.
    """
    if volume < 0.0:
        raise ValidationError(f"volume must be non-negative, got {volume}")
    depth = volume / geometry.base_area
    if depth > geometry.wall_height:
        raise ValidationError(
            f"volume {volume} m^3 gives depth {depth:.6g} m above the wall "
            f"height {geometry.wall_height} m"
        )
    return depth


def derive_scales(scenario: Scenario) -> DerivedScales:
    """Evaluate all scales of a scenario from its geometry and fill volume."""
    depth = mean_depth_from_volume(scenario.volume, scenario.geometry)
    if depth == 0.0:
        raise ValidationError("empty channel: mean depth is zero")
    wavelength = 2.0 * math.pi * scenario.geometry.r_max
    sigma = depth / wavelength
    if scenario.epsilon_mode == "amplitude_ratio":
        epsilon = scenario.measured_amplitude / depth
    else:
        epsilon = sigma**2
    return DerivedScales(
        mean_depth=depth,
        wavelength=wavelength,
        long_wave_speed=math.sqrt(scenario.fluid.g * depth),
        sigma=sigma,
        epsilon=epsilon,
        solid_body_speed=scenario.geometry.r_max * scenario.omega,
    )


def two_dimensionality_check(half_width_b: float, depth: float,
                             amplitude: float) -> PlanarityReport:
    """Check the narrow-channel condition b <= h^2/A.

    When the half width stays below depth^2/amplitude, transverse structure
    is negligible and the flow can be treated as one-dimensional along the
    ring.
    """
    if amplitude <= 0.0:
        raise ValidationError(f"amplitude must be positive, got {amplitude}")
    threshold = depth * depth / amplitude
    return PlanarityReport(
        threshold=threshold,
        half_width_b=half_width_b,
        satisfied=half_width_b <= threshold,
    )


def validate_shallowness(scales: DerivedScales,
                         threshold: float = SHALLOWNESS_LIMIT) -> ShallownessReport:
    """Flag whether sigma is small enough for the long-wave model to apply."""
    return ShallownessReport(
        sigma=scales.sigma,
        threshold=threshold,
        satisfied=scales.sigma < threshold,
    )
