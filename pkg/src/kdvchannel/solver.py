"""Explicit finite-difference integration of the forced wave equation.

The surface elevation lives on a uniform periodic grid of azimuthal angles
(the full ring by default). Spatial derivatives use the classical central
stencils

    eta_theta       (eta[i+1] - eta[i-1]) / (2 dtheta)
    eta_thetathetatheta  (eta[i+2] - 2 eta[i+1] + 2 eta[i-1] - eta[i-2]) / (2 dtheta^3)

with periodic index wrapping, and time uses forward Euler:

    eta[i]^{n+1} = eta[i]^n - dt (A/C) w_d d3[i] - dt (B/C) w_nl eta[i] d1[i]
                   - dt * forcing[i] / C

The weights w_d, w_nl default to 1; the damped pair (0.01, 0.001) keeps
long marginally-resolved runs from blowing up at the cost of fidelity.
Forward Euler with central stencils has no strict stability region, so the
timestep must stay well below the Courant bound and horizons finite; blow-up
is detected and reported rather than prevented.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import KdvCoefficients
from .scenario import GRAVITY, ChannelGeometry, ValidationError

FULL_RING = 2.0 * math.pi
MIN_POINTS = 5  # widest stencil reaches i +/- 2

FORCING_MODES = ("full_sin", "eta_theta_approx", "off")

# damped weights (nonlinear, dispersive) used by the --paper-stabilized preset
STABILIZED_WEIGHTS = (0.01, 0.001)

BLOWUP_FACTOR = 1e3  # |eta| beyond this multiple of the initial max aborts


class BlowUpError(RuntimeError):
    """The explicit scheme produced a non-finite or runaway surface."""

    def __init__(self, step_index: int, message: str, last_good=None):
        super().__init__(message)
        self.step_index = step_index
        self.last_good = last_good


@dataclass(frozen=True)
class RingGrid:
    """Uniform periodic grid of azimuthal angles.

    ``length`` is the periodic arc length (2*pi for the physical ring;
    non-physical arc lengths are allowed for scheme verification).
    """

    n_points: int
    d_theta: float
    theta: np.ndarray
    theta_start: float = 0.0
    length: float = FULL_RING

    def __post_init__(self):
        if self.n_points < MIN_POINTS:
            raise ValidationError(
                f"need at least {MIN_POINTS} grid points, got {self.n_points}"
            )
        if abs(self.d_theta * self.n_points - self.length) > 1e-10:
            raise ValidationError("d_theta * n_points must equal the arc length")

    @classmethod
    def uniform(cls, n_points: int, length: float = FULL_RING,
                theta_start: float = 0.0) -> "RingGrid":
        if n_points < MIN_POINTS:
            raise ValidationError(
                f"need at least {MIN_POINTS} grid points, got {n_points}"
            )
        d_theta = length / n_points
        theta = theta_start + d_theta * np.arange(n_points)
        return cls(n_points=n_points, d_theta=d_theta, theta=theta,
                   theta_start=theta_start, length=length)

    def wrap(self, delta):
        """Wrap angular offsets into (-length/2, length/2]."""
        half = 0.5 * self.length
        return half - np.mod(half - np.asarray(delta), self.length)


@dataclass(frozen=True)
class WaveState:
    """Surface elevation samples on a ring grid at one instant."""

    grid: RingGrid
    eta: np.ndarray
    time: float = 0.0
    step_index: int = 0

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=np.float64)
        object.__setattr__(self, "eta", eta)
        if eta.shape != (self.grid.n_points,):
            raise ValidationError(
                f"eta has shape {eta.shape}, expected ({self.grid.n_points},)"
            )


@dataclass(frozen=True)
class StepParams:
    """Everything one explicit update needs besides the state itself."""

    coeffs: KdvCoefficients
    dt: float
    weight_nonlinear: float = 1.0
    weight_dispersive: float = 1.0
    forcing_mode: str = "full_sin"
    courant: float = 1.0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.weight_nonlinear < 0.0 or self.weight_dispersive < 0.0:
            raise ValidationError("weights must be non-negative")
        if not 0.0 < self.courant <= 1.0:
            raise ValidationError(f"courant must be in (0, 1], got {self.courant}")
        if self.forcing_mode not in FORCING_MODES:
            raise ValidationError(
                f"forcing_mode must be one of {FORCING_MODES}, got {self.forcing_mode!r}"
            )


@dataclass
class SimulationResult:
    final: WaveState
    snapshots: list = field(default_factory=list)


def gaussian_initial_condition(grid: RingGrid, amplitude: float, avg: float,
                               st: float) -> WaveState:
    """Gaussian hump amplitude * exp(-((theta-avg)/st)^2), periodically wrapped."""
    if st <= 0.0:
        raise ValidationError(f"st must be positive, got {st}")
    d = grid.wrap(grid.theta - avg)
    return WaveState(grid=grid, eta=amplitude * np.exp(-((d / st) ** 2)))


def first_derivative(state: WaveState) -> np.ndarray:
    """Central first difference with periodic wrapping; exact on linears."""
    return _first_diff(state.eta, state.grid.d_theta)


def third_derivative(state: WaveState) -> np.ndarray:
    """Five-point central third difference with periodic wrapping; exact on cubics."""
    return _third_diff(state.eta, state.grid.d_theta)


def _first_diff(eta: np.ndarray, d_theta: float) -> np.ndarray:
    return (np.roll(eta, -1) - np.roll(eta, 1)) / (2.0 * d_theta)


def _third_diff(eta: np.ndarray, d_theta: float) -> np.ndarray:
    return (np.roll(eta, -2) - 2.0 * np.roll(eta, -1)
            + 2.0 * np.roll(eta, 1) - np.roll(eta, 2)) / (2.0 * d_theta**3)


def forcing_field(grid: RingGrid, t: float, coeffs: KdvCoefficients) -> np.ndarray:
    """Rotating forcing D0 * sin(theta - omega t) sampled on the grid."""
    return coeffs.d_forcing_amp * np.sin(grid.theta - coeffs.omega * t)


def courant_dt(courant: float, d_theta: float, geometry: ChannelGeometry,
               omega: float, depth: float, g: float = GRAVITY) -> float:
    """Timestep from the Courant rule dt = C_r dtheta r_max / (omega r_max + sqrt(g h)).

    The advection speed is the solid-body speed at the outer wall plus the
    long-wave disturbance speed.
    """
    if not 0.0 < courant <= 1.0:
        raise ValidationError(f"courant must be in (0, 1], got {courant}")
    return (courant * d_theta * geometry.r_max
            / (omega * geometry.r_max + math.sqrt(g * depth)))


def step(state: WaveState, params: StepParams) -> WaveState:
    """Advance the surface one explicit step; raises BlowUpError on non-finite output."""
    eta = state.eta
    dt = params.dt
    coeffs = params.coeffs
    c = coeffs.c_time
    d1 = _first_diff(eta, state.grid.d_theta)
    new = (eta
           - dt * (coeffs.a_disp / c) * params.weight_dispersive
             * _third_diff(eta, state.grid.d_theta)
           - dt * (coeffs.b_nonlin / c) * params.weight_nonlinear * eta * d1)
    if params.forcing_mode == "full_sin":
        if coeffs.d_forcing_amp != 0.0:
            new = new - (dt / c) * forcing_field(state.grid, state.time, coeffs)
    elif params.forcing_mode == "eta_theta_approx":
        # linearized forcing: the rotating sine is replaced by eta_theta
        new = new - (dt / c) * d1
    index = state.step_index + 1
    if not np.all(np.isfinite(new)):
        raise BlowUpError(index, f"non-finite surface elevation at step {index}")
    return WaveState(grid=state.grid, eta=new, time=state.time + dt,
                     step_index=index)


def simulate(ic: WaveState, params: StepParams, n_steps: int, stride: int = 1,
             sink=None) -> SimulationResult:
    """Run ``n_steps`` explicit steps, emitting every ``stride``-th state.

    ``sink``, when given, is called with each emitted WaveState (the initial
    state first, the final state always). Aborts with BlowUpError -- carrying
    the last good state -- if the surface goes non-finite or exceeds
    BLOWUP_FACTOR times the initial maximum.
    """
    if n_steps < 0:
        raise ValidationError(f"n_steps must be non-negative, got {n_steps}")
    if stride < 1:
        raise ValidationError(f"stride must be at least 1, got {stride}")
    initial_max = float(np.max(np.abs(ic.eta)))
    limit = BLOWUP_FACTOR * initial_max if initial_max > 0.0 else math.inf

    snapshots = [ic]
    if sink is not None:
        sink(ic)
    state = ic
    for i in range(n_steps):
        try:
            state = step(state, params)
        except BlowUpError as err:
            err.last_good = snapshots[-1]
            raise
        if float(np.max(np.abs(state.eta))) > limit:
            raise BlowUpError(
                state.step_index,
                f"surface elevation exceeded {BLOWUP_FACTOR:g} x initial max "
                f"at step {state.step_index}",
                last_good=snapshots[-1],
            )
        if (i + 1) % stride == 0 or i + 1 == n_steps:
            snapshots.append(state)
            if sink is not None:
                sink(state)
    return SimulationResult(final=state, snapshots=snapshots)
