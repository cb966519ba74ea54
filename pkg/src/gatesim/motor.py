"""Brushless-motor actuation energy model and the velocity-to-rotor-speed flight map.

The electrical model is a resistive winding in series with the back EMF.  At
steady state the per-motor power e(t)*i(t) expands into a quartic polynomial
in rotor speed plus spin-up terms in the rotor acceleration; integrating the
summed 4-motor power over a flight gives the actuation energy.

All angular speeds are in rad/s internally.  The 7994 rpm motor limit is
converted on construction; the torque constant doubles as the back-EMF
constant (same SI value in V*s/rad and N*m/A).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    BladeClearanceExceedsRadius,
    EmptyProfile,
    ExceedsMaxRotorSpeed,
    ZeroTorqueConstant,
)

RPM_TO_RAD = 2.0 * np.pi / 60.0

#: Total instantaneous power of the calibrated hover configuration [W].
HOVER_POWER_W = 124.0


@dataclass(frozen=True)
class MotorParams:
    """Physical constants of one rotor motor and its propeller load.

    ``load_torque_coeff`` scales the aerodynamic load torque k * omega^2.
    """

    resistance: float = 0.3            # winding resistance [ohm]
    supply_voltage: float = 15.0       # [V]
    omega_max: float = 7994.0 * RPM_TO_RAD  # [rad/s]
    friction_torque: float = 0.0187    # static motor friction [N*m]
    load_torque_coeff: float = 9.04969e-09  # [N*m*s^2/rad^2]
    damping: float = 2e-04             # viscous damping [N*m*s/rad]
    k_t: float = 0.532                 # torque constant [N*m/A] == back-EMF [V*s/rad]
    rotor_inertia: float = 4.9e-06     # [kg*m^2]
    n_blades: int = 3
    blade_mass: float = 0.001          # [kg]
    blade_radius: float = 0.1          # [m]
    blade_clearance: float = 0.023     # hub clearance between blade and motor [m]

    def __post_init__(self):
        if self.resistance <= 0 or self.supply_voltage <= 0 or self.omega_max <= 0:
            raise ValueError("resistance, supply voltage and omega_max must be positive")
        if self.k_t <= 0:
            raise ZeroTorqueConstant("torque constant must be positive")
        if min(self.friction_torque, self.damping, self.load_torque_coeff) < 0:
            raise ValueError("friction, damping and load coefficients must be >= 0")
        if self.rotor_inertia <= 0 or self.blade_mass < 0 or self.blade_radius <= 0:
            raise ValueError("inertia, blade mass and radius must be positive")


def load_inertia(params: MotorParams) -> float:
    """Propeller load inertia: n_blades * blade_mass * (r - clearance)^2 / 4."""
    arm = params.blade_radius - params.blade_clearance
    if arm < 0:
        raise BladeClearanceExceedsRadius(
            f"clearance {params.blade_clearance} exceeds radius {params.blade_radius}"
        )
    return 0.25 * params.n_blades * params.blade_mass * arm**2


@dataclass(frozen=True)
class EnergyCoefficients:
    """Per-motor power expansion coefficients.

    Steady-state power is the quartic c0 + c1 w + c2 w^2 + c3 w^3 + c4 w^4.
    The spin-up contribution from the inertial current J dw/dt expands to
    (accel_lin + accel_cross w + c5 w^2) dw + accel_quad dw^2, with c5 the
    inertia-load cross coefficient 2 R J k / Kt^2.
    """

    c0: float
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    j_total: float
    accel_lin: float
    accel_cross: float
    accel_quad: float


def energy_coefficients(params: MotorParams) -> EnergyCoefficients:
    """Expand e(t)*i(t) into rotor-speed polynomial coefficients."""
    if params.k_t <= 0:
        raise ZeroTorqueConstant("torque constant must be positive")
    r = params.resistance
    kt = params.k_t
    ke = params.k_t  # back-EMF constant equals the torque constant
    tf = params.friction_torque
    df = params.damping
    kl = params.load_torque_coeff
    j = params.rotor_inertia + load_inertia(params)

    c0 = r * tf**2 / kt**2
    c1 = (tf / kt) * (2.0 * r * df / kt + ke)
    c2 = (df / kt) * (r * df / kt + ke) + 2.0 * r * tf * kl / kt**2
    c3 = (kl / kt) * (2.0 * r * df / kt + ke)
    c4 = r * kl**2 / kt**2
    c5 = 2.0 * r * j * kl / kt**2
    accel_lin = 2.0 * r * tf * j / kt**2
    accel_cross = (2.0 * r * df / kt + ke) * j / kt
    accel_quad = r * j**2 / kt**2
    return EnergyCoefficients(
        c0, c1, c2, c3, c4, c5, j, accel_lin, accel_cross, accel_quad
    )


def motor_power(c: EnergyCoefficients, omega, domega=0.0):
    """Instantaneous per-motor electrical power [W] at rotor speed and acceleration.

    Exactly equals the product of motor voltage and current; at constant
    rotor speed it reduces to the quartic c0 + c1 w + ... + c4 w^4.
    Accepts scalars or arrays.
    """
    omega = np.asarray(omega, dtype=float)
    domega = np.asarray(domega, dtype=float)
    steady = c.c0 + omega * (c.c1 + omega * (c.c2 + omega * (c.c3 + omega * c.c4)))
    spin = (c.accel_lin + c.accel_cross * omega + c.c5 * omega**2) * domega
    spin = spin + c.accel_quad * domega**2
    out = steady + spin
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RotorSpeedProfile:
    """Uniformly sampled rotor speeds for the 4 motors: shape (n, 4), dt apart."""

    omegas: np.ndarray
    dt: float
    omega_max: float = 7994.0 * RPM_TO_RAD

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        object.__setattr__(self, "omegas", omegas)
        if omegas.ndim != 2 or omegas.shape[1] != 4:
            raise ValueError("profile must have shape (n, 4)")
        if len(omegas) == 0:
            raise EmptyProfile("rotor speed profile has no samples")
        if self.dt <= 0:
            raise ValueError("sample period must be positive")
        if np.any(omegas < 0) or np.any(omegas > self.omega_max + 1e-9):
            raise ValueError("rotor speeds must lie in [0, omega_max]")


def trajectory_energy(c: EnergyCoefficients, profile: RotorSpeedProfile) -> float:
    """Actuation energy [J]: trapezoidal integral of the summed 4-motor power.

    Rotor accelerations come from central finite differences of the sampled
    profile (one-sided at the ends).
    """
    omegas = profile.omegas
    if len(omegas) == 1:
        return 0.0
    domegas = np.gradient(omegas, profile.dt, axis=0)
    power = motor_power(c, omegas, domegas).sum(axis=1)
    return float(np.trapezoid(power, dx=profile.dt))


def hover_rotor_speed(
    c: EnergyCoefficients,
    total_power: float = HOVER_POWER_W,
    omega_max: float = 7994.0 * RPM_TO_RAD,
) -> float:
    """Rotor speed at which the 4 motors together dissipate ``total_power``.

    The steady-state power is strictly increasing in omega, so the root is
    unique on [0, omega_max].
    """
    def gap(w):
        return 4.0 * motor_power(c, w) - total_power

    if gap(omega_max) < 0:
        raise ExceedsMaxRotorSpeed("target power unreachable below omega_max")
    return float(optimize.brentq(gap, 0.0, omega_max, xtol=1e-12, rtol=1e-15))


@dataclass(frozen=True)
class FlightModel:
    """Symmetric-thrust quadrotor cruise model mapping airspeed to rotor speed.

    In steady flight the per-motor thrust balances weight and quadratic body
    drag; rotor speed scales with the square root of thrust from its hover
    value.
    """

    mass: float = 0.5           # [kg]
    gravity: float = 9.81       # [m/s^2]
    drag_coeff: float = 0.05    # body drag [N*s^2/m^2]
    hover_speed: float = 0.0    # rotor speed at hover [rad/s]
    omega_max: float = 7994.0 * RPM_TO_RAD

    def __post_init__(self):
        if self.mass <= 0 or self.gravity <= 0 or self.hover_speed < 0:
            raise ValueError("mass, gravity and hover speed must be positive")
        if self.drag_coeff < 0:
            raise ValueError("drag coefficient must be >= 0")


def default_flight_model(
    c: EnergyCoefficients,
    hover_power: float = HOVER_POWER_W,
    mass: float = 0.5,
    gravity: float = 9.81,
    drag_coeff: float = 0.05,
    omega_max: float = 7994.0 * RPM_TO_RAD,
) -> FlightModel:
    """Flight model with the hover rotor speed calibrated to ``hover_power``."""
    omega_h = hover_rotor_speed(c, hover_power, omega_max)
    return FlightModel(mass, gravity, drag_coeff, omega_h, omega_max)


def rotor_speed_for_velocity(fm: FlightModel, v: float) -> float:
    """Steady-flight rotor speed [rad/s] at airspeed v [m/s].

    Monotone nondecreasing in v with omega(0) equal to the hover speed.
    """
    if v < 0:
        raise ValueError("airspeed must be >= 0")
    drag_accel = fm.drag_coeff * v * v / fm.mass
    thrust_ratio = np.hypot(fm.gravity, drag_accel) / fm.gravity
    omega = fm.hover_speed * np.sqrt(thrust_ratio)
    if omega > fm.omega_max:
        raise ExceedsMaxRotorSpeed(f"omega({v}) = {omega:.1f} rad/s exceeds the motor limit")
    return float(omega)


def energy_velocity_profile(
    c: EnergyCoefficients,
    fm: FlightModel,
    depth: float,
    v_grid=None,
) -> np.ndarray:
    """Cruise energy to traverse ``depth`` at each constant speed of the grid.

    Flight time is depth / v and the energy is time * 4-motor steady power
    (acceleration transients excluded).  Returns an (n, 2) array of
    (velocity, energy) rows.
    """
    if depth <= 0:
        raise ValueError("depth must be positive")
    if v_grid is None:
        v_grid = np.arange(1.0, 17.0)
    v_grid = np.asarray(v_grid, dtype=float)
    if np.any(v_grid < 1.0) or np.any(v_grid > 16.0):
        raise ValueError("velocity grid must lie within [1, 16] m/s")
    energies = [
        (depth / v) * 4.0 * motor_power(c, rotor_speed_for_velocity(fm, v))
        for v in v_grid
    ]
    return np.column_stack([v_grid, energies])


def write_profile_csv(profiles: dict[float, np.ndarray], path) -> None:
    """Export energy-velocity profiles as CSV: depth,v,energy_J."""
    with open(path, "w") as fh:
        fh.write("depth,v,energy_J\n")
        for depth in sorted(profiles):
            for v, e in profiles[depth]:
                fh.write(f"{depth:.6f},{v:.6f},{e:.6f}\n")


def calibration_report(c: EnergyCoefficients, fm: FlightModel) -> str:
    """Human-readable summary of the calibrated hover configuration."""
    hover_total = 4.0 * motor_power(c, fm.hover_speed)
    lines = [
        "hover calibration",
        f"  hover rotor speed : {fm.hover_speed:.4f} rad/s "
        f"({fm.hover_speed / RPM_TO_RAD:.1f} rpm)",
        f"  hover total power : {hover_total:.4f} W",
        f"  drag coefficient  : {fm.drag_coeff:.6f} N*s^2/m^2",
        f"  rotor speed limit : {fm.omega_max:.2f} rad/s",
    ]
    return "\n".join(lines)
