"""Radar geometry: node placement on a disk, targets, jammer, and phase terms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8


@dataclass(frozen=True)
class RadarParams:
    """Carrier, timing and geometry parameters shared by every module.

    Attributes:
      - carrier_freq_hz: carrier frequency f
      - sample_period_s: sampling period T_s
      - pulse_repetition_s: pulse repetition interval T
      - snapshots_per_pulse: samples per pulse L
      - num_pulses: pulses per coherent interval N_p
      - disk_radius_m: radius of the disk holding all nodes
    """

    carrier_freq_hz: float = 5e9
    sample_period_s: float = 1.0 / 20e6
    pulse_repetition_s: float = 1.0 / 4000
    snapshots_per_pulse: int = 512
    num_pulses: int = 1
    disk_radius_m: float = 10.0
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name in ("carrier_freq_hz", "sample_period_s", "pulse_repetition_s", "disk_radius_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.snapshots_per_pulse < 1 or self.num_pulses < 1:
            raise ValueError("snapshots_per_pulse and num_pulses must be >= 1")
        if self.snapshots_per_pulse * self.sample_period_s > self.pulse_repetition_s * (1 + 1e-12):
            raise ValueError("L * T_s exceeds the pulse repetition interval")

    @property
    def wavelength_m(self) -> float:
        return self.speed_of_light / self.carrier_freq_hz

    def doppler_hz(self, radial_speed_mps):
        """Two-way Doppler shift 2 v f / c (works elementwise on arrays)."""
        return 2.0 * np.asarray(radial_speed_mps, dtype=float) * self.carrier_freq_hz / self.speed_of_light

    def speed_mps(self, doppler_hz):
        return np.asarray(doppler_hz, dtype=float) * self.speed_of_light / (2.0 * self.carrier_freq_hz)


@dataclass(frozen=True)
class NodePlacement:
    """Polar node coordinates. Arrays have shape (n, 2): columns radius_m, angle_rad."""

    transmit_polar: np.ndarray
    receive_polar: np.ndarray

    @property
    def m_t(self) -> int:
        return len(self.transmit_polar)

    @property
    def n_r(self) -> int:
        return len(self.receive_polar)

    def validate(self, disk_radius_m: float) -> None:
        for arr in (self.transmit_polar, self.receive_polar):
            if np.any(arr[:, 0] < 0) or np.any(arr[:, 0] > disk_radius_m):
                raise ValueError("node radius outside the disk")
            if np.any(arr[:, 1] < -np.pi) or np.any(arr[:, 1] >= np.pi):
                raise ValueError("node angle outside [-pi, pi)")

    def subset(self, m_t: int | None = None, n_r: int | None = None) -> "NodePlacement":
        tx = self.transmit_polar if m_t is None else self.transmit_polar[:m_t]
        rx = self.receive_polar if n_r is None else self.receive_polar[:n_r]
        return NodePlacement(tx, rx)


@dataclass(frozen=True)
class Target:
    azimuth_rad: float
    radial_speed_mps: float = 0.0
    initial_range_m: float = 10e3
    reflectivity: complex = 1.0

    def gamma(self, params: RadarParams) -> complex:
        """Complex amplitude with the two-way range phase folded in."""
        return complex(self.reflectivity) * np.exp(-2j * np.pi / params.wavelength_m * 2.0 * self.initial_range_m)

    def check_assumptions(self, params: RadarParams, far_field_ratio: float = 100.0,
                          max_doppler_ts: float = 0.01) -> None:
        if self.initial_range_m < far_field_ratio * params.disk_radius_m:
            raise ValueError(
                f"target range {self.initial_range_m} m violates far field "
                f"(needs >= {far_field_ratio} x disk radius)")
        fk_ts = abs(float(params.doppler_hz(self.radial_speed_mps))) * params.sample_period_s
        if fk_ts >= max_doppler_ts:
            raise ValueError(f"target too fast: f_k*T_s = {fk_ts:.3g} >= {max_doppler_ts}")


@dataclass(frozen=True)
class Jammer:
    azimuth_rad: float
    range_m: float = 10e3
    amplitude: float = 20.0  # square root of the per-pulse jammer energy

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("jammer amplitude must be nonnegative")
        if not self.range_m > 0:
            raise ValueError("jammer range must be positive")


def sample_node_placement(params: RadarParams, m_t: int, n_r: int, rng_seed) -> NodePlacement:
    """Draw transmit and receive nodes uniformly on the disk.

    Radii use the inverse CDF of the density 2 rho / r^2, i.e. rho = r sqrt(u).
    """
    if m_t < 1 or n_r < 1:
        raise ValueError("m_t and n_r must be >= 1")
    rng = np.random.default_rng(rng_seed)

    def draw(n):
        rho = params.disk_radius_m * np.sqrt(rng.random(n))
        ang = rng.uniform(-np.pi, np.pi, n)
        return np.column_stack([rho, ang])

    return NodePlacement(draw(m_t), draw(n_r))


def eta(node, azimuth_rad):
    """Far-field path-length offset r_i cos(theta - alpha_i), in meters.

    ``node`` may be a single (radius, angle) pair or an (n, 2) array; ``azimuth_rad``
    may be a scalar or an array, in which case the result broadcasts to
    (n_nodes, n_angles).
    """
    node = np.asarray(node, dtype=float)
    az = np.asarray(azimuth_rad, dtype=float)
    radius, alpha = node[..., 0], node[..., 1]
    if node.ndim == 2 and az.ndim:
        return radius[:, None] * np.cos(az[None, :] - alpha[:, None])
    return radius * np.cos(az - alpha)


def phase_terms(nodes: np.ndarray, params: RadarParams, azimuths) -> np.ndarray:
    """exp(j 2 pi / lambda * eta) for every node (rows) and azimuth (columns)."""
    az = np.atleast_1d(np.asarray(azimuths, dtype=float))
    return np.exp(2j * np.pi / params.wavelength_m * eta(nodes, az))


def steering_vector(placement: NodePlacement, params: RadarParams, azimuth_rad: float) -> np.ndarray:
    return phase_terms(placement.transmit_polar, params, [azimuth_rad])[:, 0]


def steering_matrix(placement: NodePlacement, params: RadarParams, azimuths) -> np.ndarray:
    """Transmit steering vectors stacked as columns, shape (M_t, len(azimuths))."""
    return phase_terms(placement.transmit_polar, params, azimuths)


def receive_phases(placement: NodePlacement, params: RadarParams, azimuths) -> np.ndarray:
    """Receive-side phase factors, shape (N_r, len(azimuths))."""
    return phase_terms(placement.receive_polar, params, azimuths)


@dataclass(frozen=True)
class Scene:
    params: RadarParams
    targets: tuple = field(default_factory=tuple)
    jammer: Jammer | None = None

    def check(self, far_field_ratio: float = 100.0, max_doppler_ts: float = 0.01) -> None:
        for t in self.targets:
            t.check_assumptions(self.params, far_field_ratio, max_doppler_ts)
        if self.jammer is not None and self.jammer.range_m < far_field_ratio * self.params.disk_radius_m:
            raise ValueError("jammer violates the far-field assumption")
