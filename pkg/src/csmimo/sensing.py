"""Angle-Doppler grids, basis and measurement matrices, and the stacked sensing matrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scene import NodePlacement, RadarParams, receive_phases, sample_node_placement, steering_matrix
from .waveform import WaveformMatrix, complex_gaussian, generate_qpsk, seed_sequence

GAUSSIAN = "gaussian"
MODIFIED = "modified"


@dataclass(frozen=True)
class AngleDopplerGrid:
    """Ordered grid points (a_n, b_n); azimuth in radians, Doppler in Hz."""

    angles_rad: np.ndarray
    dopplers_hz: np.ndarray
    angle_step: float | None = None
    doppler_step: float | None = None

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.angles_rad, dtype=float))
        b = np.atleast_1d(np.asarray(self.dopplers_hz, dtype=float))
        if a.shape != b.shape or a.ndim != 1 or a.size < 1:
            raise ValueError("grid needs matching 1-D angle and Doppler arrays with N >= 1")
        object.__setattr__(self, "angles_rad", a)
        object.__setattr__(self, "dopplers_hz", b)
        if len({(x, y) for x, y in zip(a.tolist(), b.tolist())}) != a.size:
            raise ValueError("grid points must be distinct")

    @property
    def size(self) -> int:
        return self.angles_rad.size

    @property
    def angles_deg(self) -> np.ndarray:
        return np.degrees(self.angles_rad)

    @classmethod
    def uniform(cls, angle_start, angle_stop, angle_step, doppler_start=0.0, doppler_stop=0.0,
                doppler_step=None) -> "AngleDopplerGrid":
        """Rectangular grid with azimuth varying fastest (radians, Hz)."""
        angles = _inclusive_range(angle_start, angle_stop, angle_step)
        if doppler_step is None or doppler_step == 0:
            dopplers = np.array([float(doppler_start)])
        else:
            dopplers = _inclusive_range(doppler_start, doppler_stop, doppler_step)
        bb, aa = np.meshgrid(dopplers, angles, indexing="ij")
        return cls(aa.ravel(), bb.ravel(), float(angle_step), None if doppler_step is None else float(doppler_step))

    @classmethod
    def from_degrees(cls, params: RadarParams, angle_start_deg, angle_stop_deg, angle_step_deg,
                     speed_start_mps=0.0, speed_stop_mps=0.0, speed_step_mps=None) -> "AngleDopplerGrid":
        angles = np.radians(_inclusive_range(angle_start_deg, angle_stop_deg, angle_step_deg))
        if speed_step_mps is None or speed_step_mps == 0:
            speeds = np.array([float(speed_start_mps)])
        else:
            speeds = _inclusive_range(speed_start_mps, speed_stop_mps, speed_step_mps)
        dopplers = params.doppler_hz(speeds)
        bb, aa = np.meshgrid(dopplers, angles, indexing="ij")
        dstep = None if speed_step_mps in (None, 0) else float(params.doppler_hz(speed_step_mps))
        return cls(aa.ravel(), bb.ravel(), float(np.radians(angle_step_deg)), dstep)

    def find(self, angle_rad, doppler_hz, angle_tol=1e-9, doppler_tol=1e-6):
        hit = np.flatnonzero((np.abs(self.angles_rad - angle_rad) <= angle_tol)
                             & (np.abs(self.dopplers_hz - doppler_hz) <= doppler_tol))
        return int(hit[0]) if hit.size else None

    def nearest(self, angle_rad, doppler_hz=0.0, doppler_weight=None) -> int:
        w = doppler_weight
        if w is None:
            w = (self.angle_step or 1.0) / self.doppler_step if self.doppler_step else 0.0
        return int(np.argmin(np.abs(self.angles_rad - angle_rad) + w * np.abs(self.dopplers_hz - doppler_hz)))


def _inclusive_range(start, stop, step):
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


@dataclass(frozen=True)
class MeasurementMatrix:
    kind: str
    matrix: np.ndarray
    generator: np.ndarray | None = None

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def row_energy(self) -> float:
        """Mean squared row norm; equals 1 when Phi Phi^H = I."""
        return float(np.mean(np.sum(np.abs(self.matrix) ** 2, axis=1)))


def _orthonormal_rows(a: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(a.conj().T)
    return q.conj().T


def generate_measurement_matrix(kind: str, M: int, L: int, waveforms: WaveformMatrix | None = None,
                                orthonormal_rows: bool = False, rng_seed=0) -> MeasurementMatrix:
    """Random M x L compression matrix for one receive node.

    ``gaussian``: i.i.d. CN(0, 1/L) entries. ``modified``: Phi' X^H with an
    M x M_t Gaussian Phi' of variance 1/(M_t E) where E is the mean column
    energy of X (1 for unit-norm columns), so both kinds carry unit expected
    row energy.
    """
    if not M < L:
        raise ValueError(f"need M < L (got M={M}, L={L})")
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(rng_seed)
    if kind == GAUSSIAN:
        phi = complex_gaussian(rng, (M, L), 1.0 / L)
        if orthonormal_rows:
            phi = _orthonormal_rows(phi)
        return MeasurementMatrix(GAUSSIAN, phi)
    if kind == MODIFIED:
        if waveforms is None:
            raise ValueError("modified measurement matrix needs the waveform matrix")
        if waveforms.L != L:
            raise ValueError("waveform length does not match L")
        m_t = waveforms.m_t
        if M > m_t:
            raise ValueError(f"modified kind needs M <= M_t (got M={M}, M_t={m_t})")
        energy = waveforms.column_energy
        gen = complex_gaussian(rng, (M, m_t), 1.0 / m_t)
        if orthonormal_rows:
            gen = _orthonormal_rows(gen)
        gen = gen / np.sqrt(energy)
        return MeasurementMatrix(MODIFIED, gen @ waveforms.samples.conj().T, gen)
    raise ValueError(f"unknown measurement kind {kind!r}")


def generate_node_measurements(kind: str, M: int, L: int, n_r: int, n_p: int = 1,
                               waveforms: WaveformMatrix | None = None, orthonormal_rows: bool = False,
                               reuse_across_pulses: bool = True, rng_seed=0):
    """One measurement matrix per receive node, or per (node, pulse) when not reused."""
    count = n_r if reuse_across_pulses else n_r * n_p
    seeds = seed_sequence(rng_seed).spawn(count)
    mats = [generate_measurement_matrix(kind, M, L, waveforms, orthonormal_rows, s) for s in seeds]
    if reuse_across_pulses:
        return mats
    return [mats[l * n_p:(l + 1) * n_p] for l in range(n_r)]


def _measurement_for(measurements, l, m):
    if measurements is None:
        return None
    entry = measurements[l]
    if isinstance(entry, MeasurementMatrix):
        return entry
    return entry[m]


def _core_columns(params, placement, waveforms, angles, dopplers, intra_pulse_doppler=True):
    """D(b_n) X v(a_n) for every point, shape (L, n_points)."""
    xv = waveforms.samples @ steering_matrix(placement, params, angles)
    if not intra_pulse_doppler:
        return xv
    n = np.arange(waveforms.L)[:, None]
    return np.exp(2j * np.pi * n * params.sample_period_s * np.asarray(dopplers)[None, :]) * xv


def _pulse_phase(params, dopplers, m):
    return np.exp(2j * np.pi * np.asarray(dopplers) * (m - 1) * params.pulse_repetition_s)


def basis_matrix(placement: NodePlacement, params: RadarParams, waveforms: WaveformMatrix,
                 grid: AngleDopplerGrid, node_index: int, pulse_index: int,
                 intra_pulse_doppler: bool = True) -> np.ndarray:
    """Psi_lm (L x N): column n is the noiseless echo of a unit target at grid point n."""
    core = _core_columns(params, placement, waveforms, grid.angles_rad, grid.dopplers_hz, intra_pulse_doppler)
    rx = receive_phases(placement, params, grid.angles_rad)[node_index]
    return core * (rx * _pulse_phase(params, grid.dopplers_hz, pulse_index))[None, :]


def stacked_columns(params: RadarParams, placement: NodePlacement, waveforms: WaveformMatrix,
                    angles, dopplers, measurements=None, n_pulses: int = 1,
                    intra_pulse_doppler: bool = True, n_r: int | None = None) -> np.ndarray:
    """Columns of Theta for arbitrary (angle, Doppler) points.

    Rows are stacked receive node outer, pulse inner. ``measurements=None``
    leaves the snapshots uncompressed (Phi = I).
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    dopplers = np.broadcast_to(np.asarray(dopplers, dtype=float), angles.shape)
    n_r = placement.n_r if n_r is None else n_r
    core = _core_columns(params, placement, waveforms, angles, dopplers, intra_pulse_doppler)
    rx = receive_phases(placement, params, angles)
    blocks = []
    for l in range(n_r):
        for m in range(1, n_pulses + 1):
            phi = _measurement_for(measurements, l, m - 1)
            blk = core if phi is None else phi.matrix @ core
            blocks.append(blk * (rx[l] * _pulse_phase(params, dopplers, m))[None, :])
    return np.vstack(blocks)


@dataclass(frozen=True)
class SensingProblem:
    theta: np.ndarray
    observations: np.ndarray
    grid: AngleDopplerGrid
    measurements: list = field(repr=False, default=None)
    n_r: int = 1
    n_p: int = 1

    @property
    def sigma_max(self) -> float:
        return float(np.max(np.linalg.norm(self.theta, axis=0)))

    @property
    def block_rows(self) -> int:
        return self.theta.shape[0] // (self.n_r * self.n_p)

    def block(self, l: int, m: int) -> np.ndarray:
        """Rows of Theta belonging to node l (0-based) and pulse m (1-based)."""
        b = self.block_rows
        start = (l * self.n_p + (m - 1)) * b
        return self.theta[start:start + b]

    def noise_row_energy(self) -> float:
        if self.measurements is None:
            return 1.0
        mats = []
        for entry in self.measurements:
            mats.extend([entry] if isinstance(entry, MeasurementMatrix) else entry)
        return float(np.mean([m.row_energy for m in mats]))


def build_sensing_problem(params: RadarParams, placement: NodePlacement, waveforms: WaveformMatrix,
                          grid: AngleDopplerGrid, measurements, received: np.ndarray,
                          intra_pulse_doppler: bool = True) -> SensingProblem:
    """Stack Phi_lm Psi_lm and Phi_lm z_lm over nodes (outer) and pulses (inner).

    ``received`` has shape (N_r, N_p, L). ``measurements`` holds one matrix per
    node (reused over pulses) or a list of N_p matrices per node; None keeps
    the full snapshots.
    """
    received = np.asarray(received)
    if received.ndim != 3:
        raise ValueError("received must have shape (N_r, N_p, L)")
    n_r, n_p, L = received.shape
    if L != waveforms.L:
        raise ValueError(f"snapshot length {L} does not match waveform length {waveforms.L}")
    if n_r > placement.n_r:
        raise ValueError("more received nodes than placed receivers")
    if measurements is not None and len(measurements) < n_r:
        raise ValueError("need a measurement matrix for every receive node")
    theta = stacked_columns(params, placement, waveforms, grid.angles_rad, grid.dopplers_hz,
                            measurements, n_p, intra_pulse_doppler, n_r=n_r)
    obs = []
    for l in range(n_r):
        for m in range(n_p):
            phi = _measurement_for(measurements, l, m)
            if phi is not None and phi.matrix.shape[1] != L:
                raise ValueError("measurement matrix width does not match L")
            obs.append(received[l, m] if phi is None else phi.matrix @ received[l, m])
    return SensingProblem(theta, np.concatenate(obs), grid, measurements, n_r, n_p)


def column_correlation(matrix: np.ndarray, i: int, j: int, normalized: bool = False) -> float:
    gi, gj = matrix[:, i], matrix[:, j]
    c = abs(np.vdot(gi, gj))
    if normalized:
        c /= np.linalg.norm(gi) * np.linalg.norm(gj)
    return float(c)


def normalized_pair_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise |a_n^H b_n| / (|a_n| |b_n|)."""
    num = np.abs(np.sum(a.conj() * b, axis=0))
    return num / (np.linalg.norm(a, axis=0) * np.linalg.norm(b, axis=0))


@dataclass(frozen=True)
class GridStepSelection:
    step: tuple | None
    average_correlation: dict

    @property
    def feasible(self) -> bool:
        return self.step is not None


def select_grid_step(params: RadarParams, placement: NodePlacement, waveforms: WaveformMatrix,
                     candidate_steps, threshold: float, angle_span=(np.radians(-8), np.radians(8)),
                     doppler_span=(0.0, 0.0), measurements=None, n_pulses: int = 1) -> GridStepSelection:
    """Largest (angle, Doppler) step whose average capture correlation meets ``threshold``.

    For each candidate the uniform grid is built, every grid column is
    correlated with the column half a step away in both axes, and the
    normalized correlations are averaged. Candidates must be ordered from
    coarsest to finest.
    """
    if not 0 < threshold < 1 and threshold != 0:
        raise ValueError("threshold must lie in [0, 1)")
    steps = [tuple(map(float, s)) for s in candidate_steps]
    if not steps:
        raise ValueError("no candidate steps")
    if any(b[0] > a[0] or b[1] > a[1] for a, b in zip(steps, steps[1:])):
        raise ValueError("candidate steps must be sorted from coarsest to finest")
    averages = {}
    chosen = None
    for da, db in steps:
        grid = AngleDopplerGrid.uniform(angle_span[0], angle_span[1], da, doppler_span[0], doppler_span[1],
                                        db if db > 0 else None)
        cols = stacked_columns(params, placement, waveforms, grid.angles_rad, grid.dopplers_hz,
                               measurements, n_pulses)
        shifted = stacked_columns(params, placement, waveforms, grid.angles_rad + da / 2,
                                  grid.dopplers_hz + db / 2, measurements, n_pulses)
        avg = float(np.mean(normalized_pair_correlation(cols, shifted)))
        averages[(da, db)] = avg
        if chosen is None and avg >= threshold:
            chosen = (da, db)
    return GridStepSelection(chosen, averages)


def unambiguous_speed_span(params: RadarParams) -> float:
    """Largest same-angle relative speed separable across pulses, c / (2 f T)."""
    return params.speed_of_light / (2.0 * params.carrier_freq_hz * params.pulse_repetition_s)


@dataclass(frozen=True)
class CorrelationStudy:
    """Seed-averaged correlation statistic for each value of the swept parameter."""

    parameter: str
    values: tuple
    averages: tuple


def receive_correlation_study(params: RadarParams, n_r_values=(1, 5, 25, 125), m_t: int = 30, M: int = 30,
                              angle_pair=(0.0, np.radians(2.0)), seeds: int = 200,
                              rng_seed=0) -> CorrelationStudy:
    """Normalized cross-correlation of two stationary columns stacked over N_r receive nodes.

    One measurement matrix is shared by all receive nodes and a single pulse
    is used, so only the receive phases change with N_r. Each seed draws a
    fresh placement, waveform and measurement matrix.
    """
    totals = np.zeros(len(n_r_values))
    for ss in seed_sequence(rng_seed).spawn(seeds):
        s_place, s_wave, s_phi = ss.spawn(3)
        placement = sample_node_placement(params, m_t, max(n_r_values), s_place)
        x = generate_qpsk(params.snapshots_per_pulse, m_t, rng_seed=s_wave)
        phi = generate_measurement_matrix(GAUSSIAN, M, params.snapshots_per_pulse, rng_seed=s_phi)
        for i, n_r in enumerate(n_r_values):
            g = stacked_columns(params, placement, x, angle_pair, 0.0, [phi] * n_r, 1, n_r=n_r)
            totals[i] += column_correlation(g, 0, 1, normalized=True)
    return CorrelationStudy("n_r", tuple(n_r_values), tuple((totals / seeds).tolist()))


def transmit_correlation_study(params: RadarParams, m_t_values=(5, 15, 45), M: int = 30,
                               angle_pair=(0.0, np.radians(2.0)), seeds: int = 200,
                               rng_seed=0) -> CorrelationStudy:
    """Normalized cross-correlation of two stationary columns for N_r = N_p = 1 as M_t varies."""
    totals = np.zeros(len(m_t_values))
    for ss in seed_sequence(rng_seed).spawn(seeds):
        s_place, s_wave, s_phi = ss.spawn(3)
        phi = generate_measurement_matrix(GAUSSIAN, M, params.snapshots_per_pulse, rng_seed=s_phi)
        for i, m_t in enumerate(m_t_values):
            placement = sample_node_placement(params, m_t, 1, s_place.spawn(1)[0])
            x = generate_qpsk(params.snapshots_per_pulse, m_t, rng_seed=s_wave.spawn(1)[0])
            g = stacked_columns(params, placement, x, angle_pair, 0.0, [phi], 1)
            totals[i] += column_correlation(g, 0, 1, normalized=True)
    return CorrelationStudy("m_t", tuple(m_t_values), tuple((totals / seeds).tolist()))


def pulse_correlation_study(params: RadarParams, n_p_values=(1, 2, 4, 8), m_t: int = 30, M: int = 30,
                            angle_rad: float = 0.0, speed_pair_mps=(0.0, 10.0), seeds: int = 200,
                            rng_seed=0) -> CorrelationStudy:
    """Auto over cross correlation of two same-angle columns stacked over N_p pulses.

    One receive node reuses its measurement matrix over the pulses; the
    ratio grows with N_p while the Doppler gap times N_p T stays below one.
    """
    dopplers = params.doppler_hz(np.asarray(speed_pair_mps, dtype=float))
    totals = np.zeros(len(n_p_values))
    for ss in seed_sequence(rng_seed).spawn(seeds):
        s_place, s_wave, s_phi = ss.spawn(3)
        placement = sample_node_placement(params, m_t, 1, s_place)
        x = generate_qpsk(params.snapshots_per_pulse, m_t, rng_seed=s_wave)
        phi = generate_measurement_matrix(GAUSSIAN, M, params.snapshots_per_pulse, rng_seed=s_phi)
        for i, n_p in enumerate(n_p_values):
            g = stacked_columns(params, placement, x, [angle_rad, angle_rad], dopplers, [phi], n_p)
            totals[i] += column_correlation(g, 0, 0) / column_correlation(g, 0, 1)
    return CorrelationStudy("n_p", tuple(n_p_values), tuple((totals / seeds).tolist()))
