"""Received baseband snapshots for targets, a jammer and thermal noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import Jammer, NodePlacement, RadarParams, Target, eta, steering_vector
from .waveform import JammerWaveform, WaveformMatrix, generate_noise, seed_sequence


@dataclass(frozen=True)
class ReceivedPulse:
    node_index: int   # 0-based receive node l
    pulse_index: int  # 1-based pulse m
    snapshots: np.ndarray


@dataclass(frozen=True)
class GroundTruthVector:
    values: np.ndarray
    support: tuple


def doppler_phases(doppler_hz: float, L: int, sample_period_s: float) -> np.ndarray:
    """Diagonal of D(f): exp(j 2 pi f n T_s), n = 0..L-1."""
    return np.exp(2j * np.pi * doppler_hz * np.arange(L) * sample_period_s)


def doppler_matrix(doppler_hz: float, L: int, sample_period_s: float) -> np.ndarray:
    return np.diag(doppler_phases(doppler_hz, L, sample_period_s))


def target_echo(target: Target, params: RadarParams, placement: NodePlacement,
                waveforms: WaveformMatrix, node_index: int, pulse_index: int) -> np.ndarray:
    lam = params.wavelength_m
    fk = float(params.doppler_hz(target.radial_speed_mps))
    rx_phase = np.exp(2j * np.pi / lam * eta(placement.receive_polar[node_index], target.azimuth_rad))
    pulse_phase = np.exp(2j * np.pi * fk * (pulse_index - 1) * params.pulse_repetition_s)
    d = doppler_phases(fk, waveforms.L, params.sample_period_s)
    xv = waveforms.samples @ steering_vector(placement, params, target.azimuth_rad)
    return target.gamma(params) * rx_phase * pulse_phase * d * xv


def jammer_echo(jammer: Jammer, params: RadarParams, placement: NodePlacement,
                jammer_wf: JammerWaveform, node_index: int, pulse_index: int) -> np.ndarray:
    lam = params.wavelength_m
    eta_l = eta(placement.receive_polar[node_index], jammer.azimuth_rad)
    phase = np.exp(-2j * np.pi / lam * (jammer.range_m - eta_l))
    return jammer.amplitude * phase * jammer_wf.pulses[pulse_index - 1]


def synthesize_received(params: RadarParams, placement: NodePlacement, targets, waveforms: WaveformMatrix,
                        node_index: int, pulse_index: int, jammer: Jammer | None = None,
                        jammer_wf: JammerWaveform | None = None, noise_variance: float = 0.0,
                        rng_seed=None) -> ReceivedPulse:
    """Snapshot vector z_lm at receive node ``node_index`` during pulse ``pulse_index``.

    Noise is per-sample complex Gaussian with ``noise_variance``; it is drawn
    from ``rng_seed`` so that each (l, m) pair owns an independent stream.
    """
    if waveforms.m_t != placement.m_t:
        raise ValueError(f"waveform has {waveforms.m_t} columns but placement has {placement.m_t} transmitters")
    if not 0 <= node_index < placement.n_r:
        raise ValueError("node_index out of range")
    if pulse_index < 1:
        raise ValueError("pulse_index is 1-based")
    z = np.zeros(waveforms.L, dtype=complex)
    for t in targets:
        z += target_echo(t, params, placement, waveforms, node_index, pulse_index)
    if jammer is not None and jammer.amplitude > 0:
        if jammer_wf is None:
            raise ValueError("jammer waveform required when a jammer is present")
        if jammer_wf.pulses.shape[1] != waveforms.L:
            raise ValueError("jammer waveform length does not match L")
        z += jammer_echo(jammer, params, placement, jammer_wf, node_index, pulse_index)
    if noise_variance > 0:
        z += generate_noise(waveforms.L, noise_variance, rng_seed)
    return ReceivedPulse(node_index, pulse_index, z)


def synthesize_all(params: RadarParams, placement: NodePlacement, targets, waveforms: WaveformMatrix,
                   n_pulses: int, jammer: Jammer | None = None, jammer_wf: JammerWaveform | None = None,
                   noise_variance: float = 0.0, rng_seed=None) -> np.ndarray:
    """All snapshots as an array of shape (N_r, N_p, L)."""
    seeds = seed_sequence(rng_seed).spawn(placement.n_r * n_pulses)
    out = np.empty((placement.n_r, n_pulses, waveforms.L), dtype=complex)
    for l in range(placement.n_r):
        for m in range(n_pulses):
            out[l, m] = synthesize_received(params, placement, targets, waveforms, l, m + 1, jammer,
                                            jammer_wf, noise_variance, seeds[l * n_pulses + m]).snapshots
    return out


def ground_truth_vector(grid, targets, params: RadarParams, angle_tol_rad: float = 1e-9,
                        doppler_tol_hz: float = 1e-6) -> GroundTruthVector:
    """Sparse vector over ``grid`` holding gamma_k at each target's grid point.

    Targets that do not coincide with a grid point are left out of the support.
    """
    s = np.zeros(grid.size, dtype=complex)
    support = []
    for t in targets:
        idx = grid.find(t.azimuth_rad, float(params.doppler_hz(t.radial_speed_mps)), angle_tol_rad, doppler_tol_hz)
        if idx is None:
            continue
        s[idx] = t.gamma(params)
        support.append(idx)
    return GroundTruthVector(s, tuple(support))
