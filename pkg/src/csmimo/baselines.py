"""Reference estimators on uncompressed snapshots: matched filter, Capon and MUSIC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import NodePlacement, RadarParams, receive_phases
from .sensing import AngleDopplerGrid, _core_columns, _measurement_for, _pulse_phase
from .waveform import WaveformMatrix

MATCHED_FILTER = "matched_filter"
CAPON = "capon"
MUSIC = "music"
METHODS = (MATCHED_FILTER, CAPON, MUSIC)


@dataclass(frozen=True)
class SpectrumEstimate:
    grid: AngleDopplerGrid
    values: np.ndarray
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,) or not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("spectrum values must be finite, nonnegative and one per grid point")
        object.__setattr__(self, "values", v)

    def peaks(self, count: int) -> np.ndarray:
        """Indices of the ``count`` largest values, largest first."""
        order = np.lexsort((np.arange(self.grid.size), -self.values))
        return order[:count]


def _check_received(received, placement, waveforms):
    received = np.asarray(received)
    if received.ndim != 3:
        raise ValueError("received must have shape (N_r, N_p, L)")
    if received.shape[0] > placement.n_r or received.shape[2] != waveforms.L:
        raise ValueError("received snapshots do not match placement or waveform length")
    return received


def matched_filter(received, placement: NodePlacement, waveforms: WaveformMatrix,
                   grid: AngleDopplerGrid, params: RadarParams, measurements=None) -> SpectrumEstimate:
    """|sum_lm ref_lmn^H z_lm|^2 / sum_lm ||ref_lmn||^2 for every grid point n.

    The reference for (l, m, n) is the noiseless echo hypothesis at grid point
    n, so the statistic is the coherent correlation normalized by its energy.
    With ``measurements`` (one Phi per node, or per node and pulse) both the
    snapshots and the references are compressed first, which gives the filter
    the same M samples per pulse that the sparse solver sees.
    """
    received = _check_received(received, placement, waveforms)
    n_r, n_p, _ = received.shape
    core = _core_columns(params, placement, waveforms, grid.angles_rad, grid.dopplers_hz)
    rx = receive_phases(placement, params, grid.angles_rad)
    acc = np.zeros(grid.size, dtype=complex)
    energy = np.zeros(grid.size)
    for l in range(n_r):
        for m in range(n_p):
            phi = _measurement_for(measurements, l, m)
            ref = core if phi is None else phi.matrix @ core
            data = received[l, m] if phi is None else phi.matrix @ received[l, m]
            phase = rx[l] * _pulse_phase(params, grid.dopplers_hz, m + 1)
            acc += phase.conj() * (ref.conj().T @ data)
            energy += np.sum(np.abs(ref) ** 2, axis=0)
    return SpectrumEstimate(grid, np.abs(acc) ** 2 / energy, MATCHED_FILTER)


def sample_covariance(received) -> np.ndarray:
    """Receive covariance (N_r x N_r) from all L * N_p snapshots."""
    received = np.asarray(received)
    n_r = received.shape[0]
    snaps = received.reshape(n_r, -1)
    return snaps @ snaps.conj().T / snaps.shape[1]


def load_diagonal(r: np.ndarray, diagonal_loading: float | None = None) -> np.ndarray:
    dim = r.shape[0]
    if diagonal_loading is None:
        diagonal_loading = 1e-6 * np.real(np.trace(r)) / dim
    if diagonal_loading < 0:
        raise ValueError("diagonal loading must be nonnegative")
    return r + diagonal_loading * np.eye(dim)


def noise_subspace_projector(r: np.ndarray, num_sources: int) -> np.ndarray:
    """E_n E_n^H from the eigenvectors of the N_r - K smallest eigenvalues."""
    dim = r.shape[0]
    if not 0 <= num_sources < dim:
        raise ValueError(f"need 0 <= num_sources < {dim} receive channels")
    _, vecs = np.linalg.eigh(r)
    en = vecs[:, :dim - num_sources]
    return en @ en.conj().T


def covariance_spectrum(received, placement: NodePlacement, waveforms: WaveformMatrix,
                        grid: AngleDopplerGrid, params: RadarParams, method: str = CAPON,
                        num_sources: int | None = None, diagonal_loading: float | None = None) -> SpectrumEstimate:
    """Capon or MUSIC spectrum from the receive covariance.

    Capon returns |beta(a, b)|^2, the power of the MIMO Capon amplitude
    estimate: the receive array is steered with R^-1 a_r / (a_r^H R^-1 a_r)
    and its output is matched to the transmit waveforms steered towards a
    (with the Doppler hypothesis b). MUSIC returns 1 / (a_r^H E_n E_n^H a_r)
    and needs more receive nodes than sources.
    """
    received = _check_received(received, placement, waveforms)
    n_r, n_p, _ = received.shape
    r = load_diagonal(sample_covariance(received), diagonal_loading)
    a_r = receive_phases(placement, params, grid.angles_rad)[:n_r]     # (N_r, N)
    if method == MUSIC:
        if num_sources is None:
            raise ValueError("MUSIC needs num_sources")
        if n_r <= num_sources:
            raise ValueError(f"MUSIC requires more receive nodes ({n_r}) than sources ({num_sources})")
        pn = noise_subspace_projector(r, num_sources)
        denom = np.real(np.sum(a_r.conj() * (pn @ a_r), axis=0))
        floor = 1e-12 * n_r
        return SpectrumEstimate(grid, 1.0 / np.maximum(denom, floor), MUSIC)
    if method != CAPON:
        raise ValueError(f"unknown covariance method {method!r}")
    rinv_a = np.linalg.solve(r, a_r)                                    # (N_r, N)
    gain = np.real(np.sum(a_r.conj() * rinv_a, axis=0))
    weights = rinv_a / gain                                             # w = R^-1 a / (a^H R^-1 a)
    core = _core_columns(params, placement, waveforms, grid.angles_rad, grid.dopplers_hz)
    proj = core.conj().T
    acc = np.zeros(grid.size, dtype=complex)
    for m in range(n_p):
        beam = proj @ received[:, m, :].T                               # (N, N_r): ref^H z_l
        acc += _pulse_phase(params, grid.dopplers_hz, m + 1).conj() * np.sum(weights.conj() * beam.T, axis=0)
    energy = n_p * np.sum(np.abs(core) ** 2, axis=0)
    return SpectrumEstimate(grid, np.abs(acc / energy) ** 2, CAPON)
