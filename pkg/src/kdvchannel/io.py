"""File formats and run orchestration.

Formats:
  * scenario files -- ``key = value`` text, one setting per line
  * measured profiles -- two-column numeric text, (rad, m) or (arc mm, mm)
  * trajectory CSV -- ``step,time_s,theta_rad,eta_m``, one row per grid point
    per emitted snapshot
  * manifest JSON -- every input and derived number a run consumed; a rerun
    from the manifest alone reproduces the trajectory bit for bit

All outputs are deterministic and timestamp-free; floats are written with
``repr`` so they round-trip exactly.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coefficients import KdvCoefficients, compute_coefficients
from .diagnostics import build_report
from .scenario import (
    EPSILON_MODES,
    GRAVITY,
    WATER_VISCOSITY,
    ChannelGeometry,
    FluidProperties,
    Scenario,
    ValidationError,
    derive_scales,
)
from .solver import (
    RingGrid,
    StepParams,
    WaveState,
    courant_dt,
    gaussian_initial_condition,
    simulate,
)

REQUIRED_SCENARIO_KEYS = (
    "r_max_m", "r_min_m", "wall_height_m", "z0_m",
    "volume_m3", "tau", "omega_rad_s",
)
OPTIONAL_SCENARIO_KEYS = ("g", "nu", "epsilon_mode", "amplitude_m")

PROFILE_UNITS = ("rad_m", "mm_arc_mm")
MIN_PROFILE_SAMPLES = 5

TRAJECTORY_HEADER = "step,time_s,theta_rad,eta_m"
RADIAL_HEADER = "r_m,eta_m"

TRAJECTORY_FILE = "trajectory.csv"
MANIFEST_FILE = "manifest.json"
DIAGNOSTICS_FILE = "diagnostics.txt"
COEFFICIENTS_FILE = "coefficients.json"
LAST_GOOD_FILE = "last_good_snapshot.csv"

PLOT_KINDS = ("snapshot", "waterfall", "radial")


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# scenario files

def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file.

    Lines are ``key = value``; blank lines and ``#`` comments are ignored.
    Unknown keys are rejected; missing required keys are reported together.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"scenario file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in REQUIRED_SCENARIO_KEYS and key not in OPTIONAL_SCENARIO_KEYS:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    missing = [key for key in REQUIRED_SCENARIO_KEYS if key not in values]
    if missing:
        raise ValidationError(f"{path}: missing required keys: {', '.join(missing)}")

    def number(key, default=None):
        if key not in values:
            return default
        try:
            return float(values[key])
        except ValueError:
            raise ValidationError(f"{path}: key {key!r} is not a number: {values[key]!r}")

    epsilon_mode = values.get("epsilon_mode", "sigma2")
    if epsilon_mode not in EPSILON_MODES:
        raise ValidationError(
            f"{path}: epsilon_mode must be one of {EPSILON_MODES}, got {epsilon_mode!r}"
        )
    geometry = ChannelGeometry(
        r_max=number("r_max_m"),
        r_min=number("r_min_m"),
        wall_height=number("wall_height_m"),
        z0=number("z0_m"),
    )
    fluid = FluidProperties(g=number("g", GRAVITY), nu=number("nu", WATER_VISCOSITY))
    return Scenario(
        geometry=geometry,
        fluid=fluid,
        volume=number("volume_m3"),
        tilt_tau=number("tau"),
        omega=number("omega_rad_s"),
        measured_amplitude=number("amplitude_m"),
        epsilon_mode=epsilon_mode,
    )


def scenario_to_mapping(scenario: Scenario) -> dict:
    """Scenario as a flat mapping using the scenario-file key names."""
    return {
        "r_max_m": scenario.geometry.r_max,
        "r_min_m": scenario.geometry.r_min,
        "wall_height_m": scenario.geometry.wall_height,
        "z0_m": scenario.geometry.z0,
        "volume_m3": scenario.volume,
        "tau": scenario.tilt_tau,
        "omega_rad_s": scenario.omega,
        "g": scenario.fluid.g,
        "nu": scenario.fluid.nu,
        "epsilon_mode": scenario.epsilon_mode,
        "amplitude_m": scenario.measured_amplitude,
    }


def scenario_from_mapping(values: dict) -> Scenario:
    geometry = ChannelGeometry(
        r_max=values["r_max_m"], r_min=values["r_min_m"],
        wall_height=values["wall_height_m"], z0=values["z0_m"],
    )
    fluid = FluidProperties(g=values["g"], nu=values["nu"])
    return Scenario(
        geometry=geometry, fluid=fluid, volume=values["volume_m3"],
        tilt_tau=values["tau"], omega=values["omega_rad_s"],
        measured_amplitude=values.get("amplitude_m"),
        epsilon_mode=values.get("epsilon_mode", "sigma2"),
    )


# ---------------------------------------------------------------------------
# measured profiles

@dataclass(frozen=True)
class MeasuredProfile:
    """Measured surface profile on a sub-arc of the ring, in (rad, m)."""

    theta: np.ndarray
    eta: np.ndarray
    source_units: str
    label: str = ""

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        eta = np.asarray(self.eta, dtype=np.float64)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "eta", eta)
        if theta.ndim != 1 or theta.shape != eta.shape:
            raise ValidationError("theta and eta must be matching 1-d arrays")
        if theta.size < MIN_PROFILE_SAMPLES:
            raise ValidationError(
                f"need at least {MIN_PROFILE_SAMPLES} samples, got {theta.size}"
            )
        if np.any(np.diff(theta) <= 0.0):
            raise ValidationError("theta samples must be strictly increasing")


def load_measured_profile(path, units: str, r_max: float,
                          label: str = "") -> MeasuredProfile:
    """Read a two-column profile and convert it to (rad, m).

    ``mm_arc_mm`` columns are arc length and elevation in millimeters; arc
    length converts through theta = s / r_max. Angles are wrapped to
    (-pi, pi] and must be strictly increasing afterwards.
    """
    if units not in PROFILE_UNITS:
        raise ValidationError(f"units must be one of {PROFILE_UNITS}, got {units!r}")
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"profile file not found: {path}")
    try:
        data = np.loadtxt(path, delimiter=None, comments="#", ndmin=2)
    except ValueError:
        try:
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except ValueError as err:
            raise ValidationError(f"{path}: not two-column numeric text ({err})")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValidationError(f"{path}: expected two columns, got shape {data.shape}")
    if units == "mm_arc_mm":
        theta = (data[:, 0] / 1000.0) / r_max
        eta = data[:, 1] / 1000.0
    else:
        theta = data[:, 0]
        eta = data[:, 1]
    theta = math.pi - np.mod(math.pi - theta, 2.0 * math.pi)
    return MeasuredProfile(theta=theta, eta=eta, source_units=units,
                           label=label or path.stem)


def gaussian_moments(profile: MeasuredProfile) -> tuple[float, float, float]:
    """Gaussian (amplitude, avg, st) estimated from profile moments.

    Treats the (non-negative part of the) elevation as a weight over theta;
    for a profile amplitude*exp(-((theta-avg)/st)^2) the weighted standard
    deviation is st/sqrt(2).
    """
    weights = np.clip(profile.eta, 0.0, None)
    total = float(np.sum(weights))
    if total <= 0.0:
        raise ValidationError("profile has no positive elevation to fit")
    avg = float(np.sum(profile.theta * weights) / total)
    var = float(np.sum((profile.theta - avg) ** 2 * weights) / total)
    return float(np.max(profile.eta)), avg, math.sqrt(2.0 * var)


@dataclass(frozen=True)
class ProfileComparison:
    l2: float
    linf: float
    amplitude_err: float


def compare_profiles(simulated: WaveState,
                     measured: MeasuredProfile) -> ProfileComparison:
    """Mismatch between a simulated surface and a measured sub-arc.

    The simulated surface is linearly interpolated (periodically) onto the
    measured angles; l2 is the RMS difference, linf the maximum difference,
    and amplitude_err the relative mismatch of the two maxima over the
    measured arc.
    """
    grid = simulated.grid
    interp = np.interp(measured.theta, grid.theta, simulated.eta,
                       period=grid.length)
    diff = interp - measured.eta
    max_meas = float(np.max(measured.eta))
    if max_meas == 0.0:
        raise ValidationError("measured profile has zero maximum")
    return ProfileComparison(
        l2=float(np.sqrt(np.mean(diff**2))),
        linf=float(np.max(np.abs(diff))),
        amplitude_err=abs(float(np.max(interp)) - max_meas) / max_meas,
    )


# ---------------------------------------------------------------------------
# trajectory CSV

def _write_state_rows(fh, state: WaveState) -> None:
    for theta, eta in zip(state.grid.theta, state.eta):
        fh.write(f"{state.step_index},{_fmt(state.time)},{_fmt(theta)},{_fmt(eta)}\n")


def write_trajectory_csv(path, states) -> None:
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        for state in states:
            _write_state_rows(fh, state)


def read_trajectory_csv(path) -> list[WaveState]:
    """Rebuild the emitted snapshots from a trajectory CSV."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if header != TRAJECTORY_HEADER:
            raise ValidationError(
                f"{path}: expected header {TRAJECTORY_HEADER!r}, got {header!r}"
            )
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    states = []
    current: list[list[str]] = []
    grid = None
    for row in rows:
        if current and row[0] != current[0][0]:
            states.append(_state_from_rows(current, grid))
            grid = states[-1].grid
            current = []
        current.append(row)
    states.append(_state_from_rows(current, grid))
    return states


def _state_from_rows(rows, grid) -> WaveState:
    step_index = int(rows[0][0])
    time = float(rows[0][1])
    theta = np.array([float(r[2]) for r in rows])
    eta = np.array([float(r[3]) for r in rows])
    if grid is None or grid.n_points != theta.size:
        n = theta.size
        d_theta = (theta[-1] - theta[0]) / (n - 1)
        grid = RingGrid(n_points=n, d_theta=d_theta, theta=theta,
                        theta_start=float(theta[0]), length=d_theta * n)
    return WaveState(grid=grid, eta=eta, time=time, step_index=step_index)


# ---------------------------------------------------------------------------
# plot scripts

_PLOT_COMMON = '''\
#!/usr/bin/env python3
"""Auto-generated plot script; reads {csv_name} from its own directory."""

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

csv_path = Path(__file__).parent / "{csv_name}"
'''

_PLOT_BODIES = {
    "snapshot": '''\
data = np.genfromtxt(csv_path, delimiter=",", names=True)
fig, ax = plt.subplots()
for step in np.unique(data["step"]):
    sel = data[data["step"] == step]
    ax.plot(sel["theta_rad"], sel["eta_m"], label=f"step {step:.0f}, t={sel['time_s'][0]:.4g} s")
ax.set_xlabel("theta [rad]")
ax.set_ylabel("eta [m]")
ax.legend(fontsize="small")
fig.savefig(Path(__file__).with_suffix(".png"), dpi=150)
''',
    "waterfall": '''\
data = np.genfromtxt(csv_path, delimiter=",", names=True)
steps = np.unique(data["step"])
span = float(data["eta_m"].max() - data["eta_m"].min()) or 1.0
fig, ax = plt.subplots(figsize=(7, 0.8 + 0.6 * len(steps)))
for i, step in enumerate(steps):
    sel = data[data["step"] == step]
    ax.plot(sel["theta_rad"], sel["eta_m"] + 1.2 * span * i, color="k", lw=0.9)
    ax.text(sel["theta_rad"][0], 1.2 * span * i, f"t={sel['time_s'][0]:.4g} s",
            va="bottom", fontsize="x-small")
ax.set_xlabel("theta [rad]")
ax.set_yticks([])
ax.set_ylabel("eta, offset per snapshot")
fig.savefig(Path(__file__).with_suffix(".png"), dpi=150)
''',
    "radial": '''\
data = np.genfromtxt(csv_path, delimiter=",", names=True)
fig, ax = plt.subplots()
ax.plot(data["r_m"], data["eta_m"], "o", ms=4, label="samples")
if "eta_fit_m" in (data.dtype.names or ()):
    ax.plot(data["r_m"], data["eta_fit_m"], "--", label="exponential fit")
ax.set_xlabel("r [m]")
ax.set_ylabel("amplitude [m]")
ax.legend()
fig.savefig(Path(__file__).with_suffix(".png"), dpi=150)
''',
}


def emit_plot_script(csv_path, kind: str, out_path=None) -> Path:
    """Write a standalone matplotlib script next to (by default) the CSV.

    The script references the CSV by file name, so the pair can be moved
    together. The CSV header is validated against the requested kind.
    """
    if kind not in PLOT_KINDS:
        raise ValidationError(f"kind must be one of {PLOT_KINDS}, got {kind!r}")
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise ValidationError(f"CSV not found: {csv_path}")
    with csv_path.open() as fh:
        header = fh.readline().strip()
    expected = TRAJECTORY_HEADER if kind in ("snapshot", "waterfall") else RADIAL_HEADER
    if not (header == expected or header.startswith(expected + ",")):
        raise ValidationError(
            f"{csv_path}: header {header!r} does not match {expected!r} for kind {kind!r}"
        )
    out_path = Path(out_path) if out_path else csv_path.with_name(
        f"{csv_path.stem}_{kind}.py")
    script = _PLOT_COMMON.format(csv_name=csv_path.name) + _PLOT_BODIES[kind]
    out_path.write_text(script)
    return out_path


# ---------------------------------------------------------------------------
# run orchestration

@dataclass
class RunConfig:
    """Inputs of one simulation run; everything else is derived."""

    scenario_path: str
    out_dir: str
    grid_points: int = 256
    courant: float = 0.01
    n_steps: int = 1000
    stride: int = 10
    weight_nonlinear: float = 1.0
    weight_dispersive: float = 1.0
    forcing_mode: str = "full_sin"
    ic_amplitude: float | None = None
    ic_center: float = math.pi
    ic_width: float = 0.3
    measured_path: str | None = None
    measured_units: str = "rad_m"
    r_eval: float | None = None


@dataclass
class RunResult:
    out_dir: Path
    manifest_path: Path
    trajectory_path: Path
    final: WaveState


def run(config: RunConfig) -> RunResult:
    """Execute scenario -> scales -> coefficients -> timestep -> simulate.

    Writes trajectory CSV, diagnostics report, coefficients dump, and the
    manifest into ``config.out_dir``. On blow-up the last good snapshot is
    saved and the error re-raised for the caller to turn into an exit code.
    """
    scenario = load_scenario(config.scenario_path)
    if config.grid_points < 5:
        raise ValidationError(f"grid_points must be at least 5, got {config.grid_points}")
    if config.stride < 1:
        raise ValidationError(f"stride must be at least 1, got {config.stride}")

    scales = derive_scales(scenario)
    coeffs = compute_coefficients(scenario, scales, r_eval=config.r_eval)
    grid = RingGrid.uniform(config.grid_points)
    dt = courant_dt(config.courant, grid.d_theta, scenario.geometry,
                    scenario.omega, scales.mean_depth, scenario.fluid.g)

    if config.measured_path is not None:
        profile = load_measured_profile(config.measured_path,
                                        config.measured_units,
                                        scenario.geometry.r_max)
        amplitude, center, width = gaussian_moments(profile)
    else:
        amplitude = config.ic_amplitude
        if amplitude is None:
            amplitude = scenario.measured_amplitude
        if amplitude is None:
            raise ValidationError(
                "no initial amplitude: set ic_amplitude, measured_path, or "
                "amplitude_m in the scenario"
            )
        center, width = config.ic_center, config.ic_width

    params = StepParams(coeffs=coeffs, dt=dt,
                        weight_nonlinear=config.weight_nonlinear,
                        weight_dispersive=config.weight_dispersive,
                        forcing_mode=config.forcing_mode,
                        courant=config.courant)
    manifest = {
        "scenario": scenario_to_mapping(scenario),
        "derived": {
            "mean_depth_m": scales.mean_depth,
            "wavelength_m": scales.wavelength,
            "long_wave_speed_m_s": scales.long_wave_speed,
            "sigma": scales.sigma,
            "epsilon": scales.epsilon,
            "solid_body_speed_m_s": scales.solid_body_speed,
        },
        "coefficients": {
            "a_disp": coeffs.a_disp,
            "b_nonlin": coeffs.b_nonlin,
            "c_time": coeffs.c_time,
            "d_forcing_amp": coeffs.d_forcing_amp,
            "omega_rad_s": coeffs.omega,
            "r_eval_m": coeffs.r_eval,
        },
        "grid": {
            "n_points": grid.n_points,
            "d_theta_rad": grid.d_theta,
            "theta_start_rad": grid.theta_start,
            "length_rad": grid.length,
        },
        "stepping": {
            "courant": config.courant,
            "dt_s": dt,
            "n_steps": config.n_steps,
            "stride": config.stride,
            "weight_nonlinear": config.weight_nonlinear,
            "weight_dispersive": config.weight_dispersive,
            "forcing_mode": config.forcing_mode,
        },
        "initial_condition": {
            "amplitude_m": amplitude,
            "center_rad": center,
            "width_rad": width,
        },
        "outputs": {
            "trajectory_csv": TRAJECTORY_FILE,
            "diagnostics": DIAGNOSTICS_FILE,
            "coefficients_dump": COEFFICIENTS_FILE,
        },
    }
    return _execute(scenario, scales, grid, params, manifest, Path(config.out_dir))


def run_from_manifest(manifest_path, out_dir) -> RunResult:
    """Repeat a recorded run exactly, using only the manifest's numbers."""
    manifest = json.loads(Path(manifest_path).read_text())
    scenario = scenario_from_mapping(manifest["scenario"])
    scales = derive_scales(scenario)
    g = manifest["grid"]
    grid = RingGrid.uniform(g["n_points"], length=g["length_rad"],
                            theta_start=g["theta_start_rad"])
    c = manifest["coefficients"]
    coeffs = KdvCoefficients(
        a_disp=c["a_disp"], b_nonlin=c["b_nonlin"], c_time=c["c_time"],
        d_forcing_amp=c["d_forcing_amp"], omega=c["omega_rad_s"],
        r_eval=c["r_eval_m"],
    )
    s = manifest["stepping"]
    params = StepParams(coeffs=coeffs, dt=s["dt_s"],
                        weight_nonlinear=s["weight_nonlinear"],
                        weight_dispersive=s["weight_dispersive"],
                        forcing_mode=s["forcing_mode"], courant=s["courant"])
    return _execute(scenario, scales, grid, params, manifest, Path(out_dir))


def _execute(scenario, scales, grid, params, manifest, out_dir) -> RunResult:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / MANIFEST_FILE
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")

    coeffs_path = out_dir / COEFFICIENTS_FILE
    coeffs_path.write_text(json.dumps(manifest["coefficients"], indent=2) + "\n")

    report = build_report(scenario, scales)
    diag_path = out_dir / DIAGNOSTICS_FILE
    diag_path.write_text(format_diagnostics(scenario, scales, report))

    ic_spec = manifest["initial_condition"]
    ic = gaussian_initial_condition(grid, ic_spec["amplitude_m"],
                                    ic_spec["center_rad"], ic_spec["width_rad"])
    stepping = manifest["stepping"]
    trajectory_path = out_dir / TRAJECTORY_FILE
    with trajectory_path.open("w", newline="\n") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        try:
            result = simulate(ic, params, stepping["n_steps"],
                              stride=stepping["stride"],
                              sink=lambda state: _write_state_rows(fh, state))
        except Exception as err:
            last_good = getattr(err, "last_good", None)
            if last_good is not None:
                write_trajectory_csv(out_dir / LAST_GOOD_FILE, [last_good])
            raise
    return RunResult(out_dir=out_dir, manifest_path=manifest_path,
                     trajectory_path=trajectory_path, final=result.final)


def format_diagnostics(scenario, scales, report, c_exp: float | None = None) -> str:
    """Fixed-order key-value rendering of the full diagnostic report."""
    from .coefficients import theoretical_wave_speed
    from .diagnostics import compare_speeds

    lines = [
        ("mean_depth_m", scales.mean_depth),
        ("wavelength_m", scales.wavelength),
        ("sigma", scales.sigma),
        ("epsilon", scales.epsilon),
        ("long_wave_speed_m_s", scales.long_wave_speed),
        ("solid_body_speed_m_s", scales.solid_body_speed),
        ("hydraulic_radius_m", report.hydraulic_radius),
        ("wetted_perimeter_m", report.wetted_perimeter),
        ("reynolds", report.reynolds),
        ("regime", report.regime),
        ("rossby_precession", report.rossby_precession),
        ("rossby_rotation", report.rossby_rotation),
        ("ekman", report.ekman),
        ("froude", report.froude),
        ("critical", report.critical),
        ("breaking", report.breaking),
    ]
    if scenario.measured_amplitude is not None:
        c_th = theoretical_wave_speed(scales.mean_depth,
                                      scenario.measured_amplitude,
                                      scenario.fluid.g)
        lines.append(("theoretical_speed_m_s", c_th))
        if c_exp is not None:
            lines.append(("measured_speed_m_s", c_exp))
            lines.append(("speed_err_vs_measured", compare_speeds(c_th, c_exp)))
            lines.append(("speed_err_vs_theory", abs(c_th - c_exp) / abs(c_th)))
    return "".join(f"{key} = {value}\n" for key, value in lines)


def diagnostics_csv_row(scenario_name, scenario, scales, report) -> str:
    values = [scenario_name, scales.mean_depth, scales.sigma, scales.epsilon,
              report.hydraulic_radius, report.reynolds, report.regime,
              report.rossby_precession, report.rossby_rotation, report.ekman,
              report.froude, report.critical, report.breaking]
    return ",".join(str(v) for v in values)


DIAGNOSTICS_CSV_HEADER = ("scenario,mean_depth_m,sigma,epsilon,hydraulic_radius_m,"
                          "reynolds,regime,rossby_precession,rossby_rotation,"
                          "ekman,froude,critical,breaking")


# ---------------------------------------------------------------------------
# sweeps

def sweep(configs, max_workers: int | None = None):
    """Run independent configs concurrently, each in its own output directory.

    Returns a list of (config, RunResult or exception) pairs in input order.
    """
    out_dirs = [str(Path(c.out_dir).resolve()) for c in configs]
    if len(set(out_dirs)) != len(out_dirs):
        raise ValidationError("sweep configs must use distinct output directories")

    def guarded(config):
        try:
            return run(config)
        except Exception as err:
            return err

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        outcomes = list(pool.map(guarded, configs))
    return list(zip(configs, outcomes))
