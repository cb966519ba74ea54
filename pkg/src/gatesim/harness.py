"""Closed-loop episode runner and benchmark suites.

One episode: hover and perceive the moving gate (event-driven spiking tracker
or a ground-truth depth baseline that pays extra processing latency), predict
the flight time from depth, predict the gate-plane intercept, fly a
minimum-jerk path there, and score success and actuation energy.

Suites aggregate seeded episodes into the success-rate grid, the paired
event-vs-depth energy comparison, and the 2x2 perception/planner ablation.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

import numpy as np

from . import pgnn as pgnn_mod
from .fitting import build_dataset, default_training_depths
from .motor import (
    EnergyCoefficients,
    MotorParams,
    RotorSpeedProfile,
    default_flight_model,
    energy_coefficients,
    motor_power,
    trajectory_energy,
    FlightModel,
)
from .planner import (
    PlannerInput,
    min_jerk_trajectory,
    predict_intercept,
    sample_arrays,
    write_trajectory_csv,
)
from .scene import EventCameraSim, GateState, WorldConfig, rewind_gate, step_gate
from .tracker import LifConfig, SnnGateTracker

EVENT_LATENCY = 0.2      # perception pipeline delay of the event path [s]
DEPTH_LATENCY = 2.2      # depth-image pipeline delay: event path + 2 s [s]
DEPTH_TRACKER_HZ = 30.0  # update rate of the depth baseline
PERCEPTION_MODES = ("event-snn", "depth-baseline")
PLANNER_MODES = ("pgnn", "vanilla-ann")
FLIGHT_SAMPLE_DT = 1e-3


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything one episode needs: world, perception and planner settings."""

    drone_x: float = 2.0
    drone_y: float = 0.0
    gate_y0: float = 2.0
    gate_speed: float = 0.5
    gate_bound: float = 2.0
    gate_radius: float = 1.0
    gate_plane_x: float = -2.0
    drone_radius: float = 0.25
    sensing_dt: float = 0.1
    frame_dt: float = 0.01
    event_threshold: float = 0.5
    spurious_rate: float = 0.0
    ring_thickness_px: float = 2.0
    depth_noise_sigma: float = 0.0
    perception_mode: str = "event-snn"
    planner_mode: str = "pgnn"
    perception_latency: float | None = None  # None -> mode default
    runs_per_point: int = 10
    max_sensing_bins: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.perception_mode not in PERCEPTION_MODES:
            raise ValueError(f"unknown perception mode {self.perception_mode!r}")
        if self.planner_mode not in PLANNER_MODES:
            raise ValueError(f"unknown planner mode {self.planner_mode!r}")
        if self.drone_x <= self.gate_plane_x:
            raise ValueError("drone must start in front of the gate plane")
        if self.runs_per_point < 1:
            raise ValueError("runs_per_point must be >= 1")
        if self.perception_latency is not None and self.perception_latency < 0:
            raise ValueError("latency must be >= 0")

    @property
    def latency(self) -> float:
        if self.perception_latency is not None:
            return self.perception_latency
        return EVENT_LATENCY if self.perception_mode == "event-snn" else DEPTH_LATENCY

    @property
    def depth(self) -> float:
        return self.drone_x - self.gate_plane_x

    def gate(self) -> GateState:
        return GateState(
            self.gate_y0, self.gate_speed, self.gate_bound,
            self.gate_radius, self.gate_plane_x,
        )

    def world(self) -> WorldConfig:
        return WorldConfig(
            gate=self.gate(),
            drone_x=self.drone_x,
            drone_y=self.drone_y,
            sensing_dt=self.sensing_dt,
            frame_dt=self.frame_dt,
            event_threshold=self.event_threshold,
            spurious_rate=self.spurious_rate,
            ring_thickness_px=self.ring_thickness_px,
            seed=self.seed,
        )


@dataclass(frozen=True)
class EpisodeResult:
    """Outcome of one episode: success, energy split, and timing breakdown."""

    success: bool
    energy_J: float
    hover_energy_J: float
    flight_energy_J: float
    miss_distance: float
    t_traj: float
    y_star: float
    timing: dict
    tracking_lost: bool = False


@dataclass
class PlannerModels:
    """Calibrated/trained models shared across episodes."""

    coeffs: EnergyCoefficients
    flight: FlightModel
    pgnn_params: pgnn_mod.MlpParams
    vanilla_params: pgnn_mod.MlpParams
    lif: LifConfig = field(default_factory=LifConfig)

    def planner_params(self, planner_mode: str) -> pgnn_mod.MlpParams:
        return self.pgnn_params if planner_mode == "pgnn" else self.vanilla_params


def build_default_models(seed: int = 0, epochs: int = 2000) -> PlannerModels:
    """Calibrate the energy model and train both planner variants.

    The two variants differ only in the regularization coefficient (default
    vs zero) and share the training seed.
    """
    coeffs = energy_coefficients(MotorParams())
    flight = default_flight_model(coeffs)
    samples = build_dataset(default_training_depths(), coeffs, flight)
    pgnn_params, _ = pgnn_mod.train_pgnn(
        samples, pgnn_mod.TrainConfig(lam=1e-4, epochs=epochs, seed=seed)
    )
    vanilla_params, _ = pgnn_mod.train_pgnn(
        samples, pgnn_mod.TrainConfig(lam=0.0, epochs=epochs, seed=seed)
    )
    return PlannerModels(coeffs, flight, pgnn_params, vanilla_params)


def _quantize_tick(t: float, hz: float) -> float:
    return np.floor(t * hz + 1e-9) / hz


def _perceive_events(cfg: EpisodeConfig, models: PlannerModels):
    """Run the spiking tracker until two tracks exist.

    The tracker warms up on one pre-roll bin (the sensor was already watching
    before the episode clock starts), then sensing bins are charged against
    hover time.  Returns (y1, y2, dt_meas, depth_meas, sensing_time) or None
    when tracking is lost (> 3 consecutive boxless bins or the bin budget).
    """
    world = cfg.world()
    camera = world.camera()
    frames_per_bin = max(1, round(cfg.sensing_dt / cfg.frame_dt))
    sim = EventCameraSim(
        world, camera,
        start_time=-cfg.sensing_dt,
        gate=rewind_gate(cfg.gate(), cfg.sensing_dt),
    )
    tracker = SnnGateTracker(camera, models.lif, cfg.depth_noise_sigma, cfg.seed)

    tracks = []
    empty_streak = 0
    charged_bins = 0
    for bin_idx in range(cfg.max_sensing_bins + 1):
        chunks = [sim.step()[2] for _ in range(frames_per_bin)]
        events = np.concatenate(chunks)
        track = tracker.process_bin(events, sim.time, cfg.depth)
        if bin_idx == 0:
            continue  # warm-up bin: no previous events to recover from
        charged_bins += 1
        if track is None:
            empty_streak += 1
            if empty_streak > 3:
                break
        else:
            empty_streak = 0
            tracks.append(track)
            if len(tracks) == 2:
                y1, y2 = tracks[0].world_y, tracks[1].world_y
                dt_meas = tracks[1].t - tracks[0].t
                return (y1, y2, dt_meas, tracks[1].depth), charged_bins * cfg.sensing_dt
    # lost: streak too long or the bin budget ran out before two tracks
    return None, charged_bins * cfg.sensing_dt


def _perceive_depth(cfg: EpisodeConfig, rng: np.random.Generator):
    """Ground-truth gate positions sampled at the depth tracker's update rate.

    Measurements are taken one sensing interval apart; the window still spans
    two sensing bins of wall-clock hover.
    """
    gate = cfg.gate()
    t1 = _quantize_tick(0.0, DEPTH_TRACKER_HZ)
    t2 = _quantize_tick(cfg.sensing_dt, DEPTH_TRACKER_HZ)
    if t2 <= t1:
        t2 = t1 + 1.0 / DEPTH_TRACKER_HZ
    y1 = step_gate(gate, t1).y if t1 > 0 else gate.y
    y2 = step_gate(gate, t2).y
    depth_meas = cfg.depth
    if cfg.depth_noise_sigma > 0:
        depth_meas += cfg.depth_noise_sigma * rng.standard_normal()
    return (y1, y2, t2 - t1, depth_meas), 2.0 * cfg.sensing_dt


def _flight_rotor_speeds(fm: FlightModel, speeds: np.ndarray) -> np.ndarray:
    """Steady-flight rotor speed per sample, saturated at the motor limit."""
    drag_accel = fm.drag_coeff * speeds**2 / fm.mass
    ratio = np.hypot(fm.gravity, drag_accel) / fm.gravity
    return np.minimum(fm.hover_speed * np.sqrt(ratio), fm.omega_max)


def crossing_success(miss_distance: float, gate_radius: float, drone_radius: float) -> bool:
    """Collision-free crossing: the lateral miss must fit inside the hoop."""
    return miss_distance < gate_radius - drone_radius


def run_episode(
    cfg: EpisodeConfig,
    models: PlannerModels,
    trajectory_out=None,
) -> EpisodeResult:
    """Perceive, plan, fly, and score one episode.

    Success requires crossing the gate plane within the gate radius minus the
    drone radius of the gate's center at crossing time.  Lost tracking is
    recorded as a failed episode charged only for its hover time.
    """
    rng = np.random.default_rng(cfg.seed)
    hover_power = 4.0 * motor_power(models.coeffs, models.flight.hover_speed)

    if cfg.perception_mode == "event-snn":
        measurement, sensing_time = _perceive_events(cfg, models)
    else:
        measurement, sensing_time = _perceive_depth(cfg, rng)

    if measurement is None:
        hover_energy = hover_power * sensing_time
        return EpisodeResult(
            success=False,
            energy_J=hover_energy,
            hover_energy_J=hover_energy,
            flight_energy_J=0.0,
            miss_distance=float("inf"),
            t_traj=0.0,
            y_star=float("nan"),
            timing={"sensing": sensing_time, "latency": 0.0, "flight": 0.0},
            tracking_lost=True,
        )

    y1, y2, dt_meas, depth_meas = measurement
    L = cfg.gate_bound
    y1 = float(np.clip(y1, -L, L))
    y2 = float(np.clip(y2, -L, L))

    params = models.planner_params(cfg.planner_mode)
    v_pred = pgnn_mod.mlp_forward(params, depth_meas, "infer")
    t_traj = pgnn_mod.trajectory_time(v_pred, depth_meas)

    intercept = predict_intercept(PlannerInput(t_traj, L, y1, y2, dt_meas))
    y_star = intercept.y_star

    traj = min_jerk_trajectory(
        [cfg.drone_x, cfg.drone_y], [cfg.gate_plane_x, y_star],
        t_traj, FLIGHT_SAMPLE_DT,
    )
    if trajectory_out is not None:
        write_trajectory_csv(traj, trajectory_out)
    _, _, vel, _ = sample_arrays(traj)
    speeds = np.hypot(vel[:, 0], vel[:, 1])
    omegas = _flight_rotor_speeds(models.flight, speeds)
    profile = RotorSpeedProfile(
        np.repeat(omegas[:, None], 4, axis=1), FLIGHT_SAMPLE_DT,
        models.flight.omega_max,
    )
    flight_energy = trajectory_energy(models.coeffs, profile)
    hover_energy = hover_power * (sensing_time + cfg.latency)

    t_cross = sensing_time + cfg.latency + t_traj
    gate_y_cross = step_gate(cfg.gate(), t_cross).y
    miss = abs(y_star - gate_y_cross)
    return EpisodeResult(
        success=crossing_success(miss, cfg.gate_radius, cfg.drone_radius),
        energy_J=hover_energy + flight_energy,
        hover_energy_J=hover_energy,
        flight_energy_J=flight_energy,
        miss_distance=miss,
        t_traj=t_traj,
        y_star=y_star,
        timing={"sensing": sensing_time, "latency": cfg.latency, "flight": t_traj},
    )


# ---------------------------------------------------------------------------
# benchmark suites


@dataclass(frozen=True)
class GridCell:
    """One starting-point cell; the sign pattern alternates drone and gate
    sides on odd runs when ``alternate`` is set."""

    drone_x: float
    drone_y: float
    gate_y0: float
    gate_speed: float = 0.5
    alternate: bool = True


# gate start (by |drone_y|) for each drone depth column of the benchmark grid
_GATE_START = {
    0: {0: 2.0, 1: -1.0, 2: 1.0},
    1: {0: 2.0, 1: -1.0, 2: 1.0},
    2: {0: 2.0, 1: -1.0, 2: 1.0},
    3: {0: 0.0, 1: 1.0, 2: 0.0},
    4: {0: 2.0, 1: -2.0, 2: -2.0},
}


def default_success_grid(gate_speed: float = 0.5) -> list[GridCell]:
    """15 starting-point cells: depths 2-6 m x drone lateral {0, +-1, +-2}."""
    cells = []
    for x in range(5):
        for y_abs in (0, 1, 2):
            cells.append(GridCell(float(x), float(y_abs), _GATE_START[x][y_abs], gate_speed))
    return cells


def energy_suite_cells(gate_speed: float = 0.5) -> list[GridCell]:
    """25 flights: depths 2-6 m x drone lateral {0, 1, -1, 2, -2}."""
    cells = []
    for x in range(5):
        for y in (0.0, 1.0, -1.0, 2.0, -2.0):
            base = _GATE_START[x][int(abs(y))]
            gate_y0 = base if y >= 0 else -base
            cells.append(GridCell(float(x), y, gate_y0, gate_speed))
    return cells


def derive_run_config(
    cell: GridCell,
    run_idx: int,
    base_seed: int = 0,
    cell_idx: int = 0,
    template: EpisodeConfig = EpisodeConfig(),
) -> EpisodeConfig:
    """Seeded per-run world for a grid cell; modes come from the template.

    Different perception/planner modes run the exact same world when given
    the same (cell, run) pair: all stochastic draws happen here.
    """
    seed = base_seed + 100003 * cell_idx + 127 * run_idx + 1
    rng = np.random.default_rng(seed)
    sign = -1.0 if (cell.alternate and run_idx % 2 == 1) else 1.0
    bound = template.gate_bound
    gate_y0 = cell.gate_y0 + rng.uniform(-0.25, 0.25)
    gate_y0 = float(np.clip(gate_y0, -(bound - 0.05), bound - 0.05)) * sign
    speed = cell.gate_speed * rng.uniform(0.75, 1.25)
    direction = 1.0 if rng.random() < 0.5 else -1.0
    return replace(
        template,
        drone_x=cell.drone_x,
        drone_y=cell.drone_y * sign,
        gate_y0=gate_y0,
        gate_speed=speed * direction,
        seed=seed,
    )


@dataclass(frozen=True)
class GridResult:
    """Per-cell, per-mode aggregate of the benchmark grid."""

    drone_x: float
    drone_y: float
    gate_y0: float
    gate_speed: float
    mode: str
    success_rate: float
    mean_energy_J: float


def success_rate_grid(
    cells,
    models: PlannerModels,
    runs: int = 10,
    base_seed: int = 0,
    planner_mode: str = "pgnn",
    template: EpisodeConfig = EpisodeConfig(),
) -> list[GridResult]:
    """Success fraction per cell for both perception modes, seeded and paired."""
    if not cells:
        raise ValueError("grid must be nonempty")
    results = []
    for ci, cell in enumerate(cells):
        per_mode = {mode: [] for mode in PERCEPTION_MODES}
        for run in range(runs):
            world_cfg = derive_run_config(cell, run, base_seed, ci, template)
            for mode in PERCEPTION_MODES:
                cfg = replace(world_cfg, perception_mode=mode, planner_mode=planner_mode)
                per_mode[mode].append(run_episode(cfg, models))
        for mode in PERCEPTION_MODES:
            outcomes = per_mode[mode]
            results.append(GridResult(
                cell.drone_x, cell.drone_y, cell.gate_y0, cell.gate_speed, mode,
                float(np.mean([r.success for r in outcomes])),
                float(np.mean([r.energy_J for r in outcomes])),
            ))
    return results


def write_grid_csv(results, path) -> None:
    """Export grid results as CSV with headers matching the field names."""
    with open(path, "w") as fh:
        fh.write("drone_x,drone_y,gate_y0,gate_speed,mode,success_rate,mean_energy_J\n")
        for r in results:
            fh.write(
                f"{r.drone_x:.3f},{r.drone_y:.3f},{r.gate_y0:.3f},{r.gate_speed:.3f},"
                f"{r.mode},{r.success_rate:.6f},{r.mean_energy_J:.6f}\n"
            )


@dataclass(frozen=True)
class EnergyComparison:
    """Paired event-vs-depth energy aggregate over a flight suite."""

    mean_event_J: float
    mean_depth_J: float
    mean_surplus_J: float  # over pairs where both modes flew
    n_pairs: int
    event_success_rate: float
    depth_success_rate: float


def energy_comparison(
    models: PlannerModels,
    cells=None,
    runs: int = 10,
    base_seed: int = 0,
    planner_mode: str = "pgnn",
    template: EpisodeConfig = EpisodeConfig(),
) -> EnergyComparison:
    """Run the paired energy suite (default: the 25-flight set, 10 runs each)."""
    if cells is None:
        cells = energy_suite_cells()
    event_results, depth_results = [], []
    for ci, cell in enumerate(cells):
        for run in range(runs):
            world_cfg = derive_run_config(cell, run, base_seed, ci, template)
            event_results.append(run_episode(
                replace(world_cfg, perception_mode="event-snn", planner_mode=planner_mode),
                models,
            ))
            depth_results.append(run_episode(
                replace(world_cfg, perception_mode="depth-baseline", planner_mode=planner_mode),
                models,
            ))
    surpluses = [
        d.energy_J - e.energy_J
        for e, d in zip(event_results, depth_results)
        if not e.tracking_lost and not d.tracking_lost
    ]
    return EnergyComparison(
        float(np.mean([r.energy_J for r in event_results])),
        float(np.mean([r.energy_J for r in depth_results])),
        float(np.mean(surpluses)) if surpluses else float("nan"),
        len(surpluses),
        float(np.mean([r.success for r in event_results])),
        float(np.mean([r.success for r in depth_results])),
    )


@dataclass(frozen=True)
class AblationCell:
    """One perception x planner combination of the ablation matrix."""

    perception_mode: str
    planner_mode: str
    mean_energy_J: float
    success_rate: float


def ablation_matrix(
    models: PlannerModels,
    base_cell: GridCell | None = None,
    runs: int = 10,
    base_seed: int = 0,
    template: EpisodeConfig = EpisodeConfig(),
) -> list[AblationCell]:
    """2x2 perception/planner ablation over identical seeded worlds."""
    if base_cell is None:
        base_cell = GridCell(2.0, 0.0, 2.0)
    world_cfgs = [
        derive_run_config(base_cell, run, base_seed, 0, template)
        for run in range(runs)
    ]
    cells = []
    for perception in PERCEPTION_MODES:
        for planner in PLANNER_MODES:
            outcomes = [
                run_episode(
                    replace(w, perception_mode=perception, planner_mode=planner),
                    models,
                )
                for w in world_cfgs
            ]
            cells.append(AblationCell(
                perception, planner,
                float(np.mean([r.energy_J for r in outcomes])),
                float(np.mean([r.success for r in outcomes])),
            ))
    return cells


def ablation_energy_ratio(cells) -> float:
    """(depth + vanilla) over (event + pgnn) mean actuation energy."""
    by_key = {(c.perception_mode, c.planner_mode): c for c in cells}
    worst = by_key[("depth-baseline", "vanilla-ann")].mean_energy_J
    best = by_key[("event-snn", "pgnn")].mean_energy_J
    return worst / best


def write_ablation_csv(cells, path) -> None:
    with open(path, "w") as fh:
        fh.write("perception_mode,planner_mode,mean_energy_J,success_rate\n")
        for c in cells:
            fh.write(
                f"{c.perception_mode},{c.planner_mode},"
                f"{c.mean_energy_J:.6f},{c.success_rate:.6f}\n"
            )


# ---------------------------------------------------------------------------
# episode config files (INI key-value schema, see README)


def load_episode_config(path) -> EpisodeConfig:
    """Read an EpisodeConfig from an INI file with [world] and [episode] sections."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    world = parser["world"] if parser.has_section("world") else {}
    episode = parser["episode"] if parser.has_section("episode") else {}
    defaults = EpisodeConfig()

    def fget(section, key, default):
        raw = section.get(key, None)
        return default if raw in (None, "", "default") else float(raw)

    latency_raw = episode.get("perception_latency", "") if episode else ""
    latency = None if latency_raw in ("", "default") else float(latency_raw)
    return EpisodeConfig(
        drone_x=fget(world, "drone_x", defaults.drone_x),
        drone_y=fget(world, "drone_y", defaults.drone_y),
        gate_y0=fget(world, "gate_y0", defaults.gate_y0),
        gate_speed=fget(world, "gate_speed", defaults.gate_speed),
        gate_bound=fget(world, "gate_bound", defaults.gate_bound),
        gate_radius=fget(world, "gate_radius", defaults.gate_radius),
        gate_plane_x=fget(world, "gate_plane_x", defaults.gate_plane_x),
        sensing_dt=fget(world, "sensing_dt", defaults.sensing_dt),
        frame_dt=fget(world, "frame_dt", defaults.frame_dt),
        event_threshold=fget(world, "event_threshold", defaults.event_threshold),
        spurious_rate=fget(world, "spurious_rate", defaults.spurious_rate),
        ring_thickness_px=fget(world, "ring_thickness_px", defaults.ring_thickness_px),
        seed=int(fget(world, "seed", defaults.seed)),
        drone_radius=fget(episode, "drone_radius", defaults.drone_radius),
        depth_noise_sigma=fget(episode, "depth_noise_sigma", defaults.depth_noise_sigma),
        perception_mode=episode.get("perception_mode", defaults.perception_mode),
        planner_mode=episode.get("planner_mode", defaults.planner_mode),
        perception_latency=latency,
        runs_per_point=int(fget(episode, "runs_per_point", defaults.runs_per_point)),
        max_sensing_bins=int(fget(episode, "max_sensing_bins", defaults.max_sensing_bins)),
    )


def write_episode_config(cfg: EpisodeConfig, path) -> None:
    """Write an EpisodeConfig in the INI schema accepted by load_episode_config."""
    latency = "default" if cfg.perception_latency is None else repr(cfg.perception_latency)
    text = f"""[world]
drone_x = {cfg.drone_x!r}
drone_y = {cfg.drone_y!r}
gate_y0 = {cfg.gate_y0!r}
gate_speed = {cfg.gate_speed!r}
gate_bound = {cfg.gate_bound!r}
gate_radius = {cfg.gate_radius!r}
gate_plane_x = {cfg.gate_plane_x!r}
sensing_dt = {cfg.sensing_dt!r}
frame_dt = {cfg.frame_dt!r}
event_threshold = {cfg.event_threshold!r}
spurious_rate = {cfg.spurious_rate!r}
ring_thickness_px = {cfg.ring_thickness_px!r}
seed = {cfg.seed}

[episode]
perception_mode = {cfg.perception_mode}
planner_mode = {cfg.planner_mode}
perception_latency = {latency}
depth_noise_sigma = {cfg.depth_noise_sigma!r}
drone_radius = {cfg.drone_radius!r}
runs_per_point = {cfg.runs_per_point}
max_sensing_bins = {cfg.max_sensing_bins}
"""
    with open(path, "w") as fh:
        fh.write(text)


def load_grid_csv(path) -> list[GridCell]:
    """Read grid cells from CSV: drone_x,drone_y,gate_y0,gate_speed,alternate."""
    import csv

    cells = []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            cells.append(GridCell(
                float(row["drone_x"]),
                float(row["drone_y"]),
                float(row["gate_y0"]),
                float(row.get("gate_speed", 0.5)),
                row.get("alternate", "1").strip() in ("1", "true", "True"),
            ))
    return cells


def write_grid_cells_csv(cells, path) -> None:
    with open(path, "w") as fh:
        fh.write("drone_x,drone_y,gate_y0,gate_speed,alternate\n")
        for c in cells:
            fh.write(
                f"{c.drone_x:.3f},{c.drone_y:.3f},{c.gate_y0:.3f},"
                f"{c.gate_speed:.3f},{int(c.alternate)}\n"
            )
