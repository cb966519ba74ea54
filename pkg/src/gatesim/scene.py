"""Synthetic world: a bouncing circular gate, a pinhole camera, and a DVS-style event generator.

The gate is a hoop of fixed radius moving laterally at constant speed between
two reversal walls.  A simulated event camera watches the gate plane and emits
per-pixel polarity events whenever the rasterized hoop annulus covers or
uncovers a pixel between consecutive frames.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NonPositiveDepth

# One event per row: timestamp [s], pixel column, pixel row, polarity {+1, -1}.
EVENT_DTYPE = np.dtype([("t", "f8"), ("x", "i4"), ("y", "i4"), ("p", "i1")])


@dataclass(frozen=True)
class GateState:
    """Circular gate bouncing on the lateral interval [-bound, +bound].

    The lateral speed is constant within an episode; only its sign flips at
    the walls.  ``plane_x`` is the gate plane's position on the depth axis.
    """

    y: float = 0.0
    velocity: float = 0.5
    bound: float = 2.0
    radius: float = 1.0
    plane_x: float = -2.0

    def __post_init__(self):
        if self.bound <= 0:
            raise ValueError("bound must be positive")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if abs(self.y) > self.bound + 1e-12:
            raise ValueError("gate position outside [-bound, +bound]")


def step_gate(state: GateState, dt: float) -> GateState:
    """Advance the gate by dt with reflective (billiard) bouncing on [-L, +L].

    Total function: any dt >= 0 is folded through the reversal walls, keeping
    |velocity| unchanged and flipping its sign once per wall contact.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0.0 or state.velocity == 0.0:
        return state
    L = state.bound
    speed = abs(state.velocity)
    # Phase of the equivalent triangle wave, period 4L in distance traveled.
    if state.velocity > 0:
        phase = state.y + L
    else:
        phase = 3.0 * L - state.y
    phase = (phase + speed * dt) % (4.0 * L)
    if phase <= 2.0 * L:
        return replace(state, y=phase - L, velocity=speed)
    return replace(state, y=3.0 * L - phase, velocity=-speed)


def rewind_gate(state: GateState, dt: float) -> GateState:
    """Gate state dt seconds in the past (bouncing is time-reversible)."""
    back = step_gate(replace(state, velocity=-state.velocity), dt)
    return replace(back, velocity=-back.velocity)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera with axis-aligned pose.

    The camera sits at ``position`` and looks along ``forward``; ``right``
    maps to increasing pixel column and ``up`` to decreasing pixel row.
    """

    focal_px: float = 500.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480
    position: tuple[float, float, float] = (2.0, 0.0, 0.0)
    forward: tuple[float, float, float] = (-1.0, 0.0, 0.0)
    right: tuple[float, float, float] = (0.0, 1.0, 0.0)
    up: tuple[float, float, float] = (0.0, 0.0, 1.0)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


def project_to_pixels(camera: CameraModel, point) -> tuple[float, float]:
    """Project a world point to (sub-pixel) image coordinates.

    The result may lie outside the sensor bounds; callers clip.  Raises
    NonPositiveDepth for points at or behind the camera plane.
    """
    rel = np.asarray(point, dtype=float) - np.asarray(camera.position)
    depth = float(rel @ np.asarray(camera.forward))
    if depth <= 0:
        raise NonPositiveDepth(f"point depth {depth} is not positive")
    px = camera.cx + camera.focal_px * float(rel @ np.asarray(camera.right)) / depth
    py = camera.cy - camera.focal_px * float(rel @ np.asarray(camera.up)) / depth
    return px, py


def gate_depth(camera: CameraModel, gate: GateState) -> float:
    """Distance from the camera to the gate plane along the viewing axis."""
    center = np.asarray((gate.plane_x, gate.y, 0.0))
    rel = center - np.asarray(camera.position)
    return float(rel @ np.asarray(camera.forward))


def annulus_coverage(
    camera: CameraModel,
    gate: GateState,
    thickness_px: float = 2.0,
) -> np.ndarray:
    """Anti-aliased coverage (0..1) of the projected hoop annulus, per pixel.

    Coverage is 1 inside the band |rho - r| <= thickness/2 around the
    projected ring radius and falls off linearly over one pixel outside it.
    """
    px, py = project_to_pixels(camera, (gate.plane_x, gate.y, 0.0))
    depth = gate_depth(camera, gate)
    r_px = camera.focal_px * gate.radius / depth
    half = thickness_px / 2.0

    cov = np.zeros(camera.shape, dtype=np.float64)
    margin = r_px + half + 1.0
    x0 = max(int(np.floor(px - margin)), 0)
    x1 = min(int(np.ceil(px + margin)) + 1, camera.width)
    y0 = max(int(np.floor(py - margin)), 0)
    y1 = min(int(np.ceil(py + margin)) + 1, camera.height)
    if x0 >= x1 or y0 >= y1:
        return cov

    ys, xs = np.mgrid[y0:y1, x0:x1]
    rho = np.hypot(xs - px, ys - py)
    cov[y0:y1, x0:x1] = np.clip(half + 0.5 - np.abs(rho - r_px), 0.0, 1.0)
    return cov


def annulus_mask(
    camera: CameraModel,
    gate: GateState,
    thickness_px: float = 2.0,
    threshold: float = 0.5,
) -> np.ndarray:
    """Boolean per-pixel mask of the rasterized annulus.

    ``threshold`` is the coverage fraction at which a pixel counts as covered;
    0.5 reproduces the crisp 2-pixel band.
    """
    return annulus_coverage(camera, gate, thickness_px) >= threshold


def annulus_bbox(
    camera: CameraModel,
    gate: GateState,
    thickness_px: float = 2.0,
    threshold: float = 0.5,
):
    """Pixel bounding box (x_min, x_max, y_min, y_max) of the visible annulus, or None."""
    mask = annulus_mask(camera, gate, thickness_px, threshold)
    if not mask.any():
        return None
    ys, xs = np.nonzero(mask)
    return int(xs.min()), int(xs.max()), int(ys.min()), int(ys.max())


def _events_from_masks(before: np.ndarray, after: np.ndarray, t: float) -> np.ndarray:
    changed = before ^ after
    ys, xs = np.nonzero(changed)
    events = np.empty(len(ys), dtype=EVENT_DTYPE)
    events["t"] = t
    events["x"] = xs
    events["y"] = ys
    events["p"] = np.where(after[ys, xs], 1, -1)
    return events


def generate_events(
    camera: CameraModel,
    gate_before: GateState,
    gate_after: GateState,
    t: float,
    thickness_px: float = 2.0,
    threshold: float = 0.5,
) -> np.ndarray:
    """Events from the coverage change between two gate states.

    Polarity is +1 where the annulus newly covers a pixel and -1 where it
    uncovers one.  All events share the frame timestamp ``t``.  Returns a
    structured array with EVENT_DTYPE, ordered row-major.
    """
    before = annulus_mask(camera, gate_before, thickness_px, threshold)
    after = annulus_mask(camera, gate_after, thickness_px, threshold)
    return _events_from_masks(before, after, t)


def events_to_frame(events: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Per-pixel event counts (both polarities) as an int32 frame."""
    frame = np.zeros(shape, dtype=np.int32)
    if len(events):
        np.add.at(frame, (events["y"], events["x"]), 1)
    return frame


def write_events_csv(events: np.ndarray, path) -> None:
    """Export an event stream as CSV with header t,x,y,p (t to microseconds)."""
    with open(path, "w") as fh:
        fh.write("t,x,y,p\n")
        for ev in events:
            fh.write(f"{ev['t']:.6f},{ev['x']},{ev['y']},{ev['p']}\n")


@dataclass(frozen=True)
class WorldConfig:
    """Full description of one synthetic world.

    The seed determines every stochastic draw (spurious events, sensor
    noise); two worlds with equal configs produce bit-identical event
    streams.
    """

    gate: GateState
    drone_x: float = 2.0
    drone_y: float = 0.0
    sensing_dt: float = 0.1
    frame_dt: float = 0.01
    event_threshold: float = 0.5
    spurious_rate: float = 0.0  # expected spurious events per second, whole sensor
    ring_thickness_px: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.sensing_dt <= 0:
            raise ValueError("sensing_dt must be positive")
        if self.frame_dt <= 0:
            raise ValueError("frame_dt must be positive")

    def camera(self) -> CameraModel:
        return CameraModel(position=(self.drone_x, self.drone_y, 0.0))


class EventCameraSim:
    """Frame-stepped event generator for one world.

    Frames are spaced ``frame_dt`` apart; each step advances the gate and
    emits the coverage-change events, timestamped at the new frame time.
    Optionally injects spurious events at uniformly random pixels.
    """

    def __init__(self, config: WorldConfig, camera: CameraModel | None = None,
                 start_time: float = 0.0, gate: GateState | None = None):
        self.config = config
        self.camera = camera if camera is not None else config.camera()
        self.time = start_time
        self.gate = gate if gate is not None else config.gate
        self._rng = np.random.default_rng(config.seed)
        self._mask: np.ndarray | None = None  # cache of the last frame's annulus

    def step(self) -> tuple[float, GateState, np.ndarray]:
        """Advance one frame; returns (frame time, new gate state, events)."""
        cfg = self.config
        if self._mask is None:
            self._mask = annulus_mask(
                self.camera, self.gate, cfg.ring_thickness_px, cfg.event_threshold
            )
        after = step_gate(self.gate, cfg.frame_dt)
        self.time += cfg.frame_dt
        self.gate = after
        after_mask = annulus_mask(
            self.camera, after, cfg.ring_thickness_px, cfg.event_threshold
        )
        events = _events_from_masks(self._mask, after_mask, self.time)
        self._mask = after_mask
        if cfg.spurious_rate > 0:
            events = self._add_spurious(events)
        return self.time, after, events

    def _add_spurious(self, events: np.ndarray) -> np.ndarray:
        cfg = self.config
        n = self._rng.poisson(cfg.spurious_rate * cfg.frame_dt)
        if n == 0:
            return events
        noise = np.empty(n, dtype=EVENT_DTYPE)
        noise["t"] = self.time
        noise["x"] = self._rng.integers(0, self.camera.width, n)
        noise["y"] = self._rng.integers(0, self.camera.height, n)
        noise["p"] = self._rng.choice(np.array([-1, 1], dtype=np.int8), n)
        return np.concatenate([events, noise])
