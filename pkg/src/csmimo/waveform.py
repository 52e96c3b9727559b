"""Transmit QPSK waveforms, jammer waveforms and receiver noise."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

RAW_QPSK = "raw_qpsk"
COLUMN_ORTHONORMAL = "column_orthonormal"
NORMALIZATION_MODES = (RAW_QPSK, COLUMN_ORTHONORMAL)


class RankDeficientWaveform(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class WaveformMatrix:
    """L x M_t matrix X; column i holds the samples sent by transmit node i."""

    samples: np.ndarray
    normalization_mode: str = RAW_QPSK
    seed_used: int | None = None

    @property
    def L(self) -> int:
        return self.samples.shape[0]

    @property
    def m_t(self) -> int:
        return self.samples.shape[1]

    @property
    def column_energy(self) -> float:
        return float(np.mean(np.sum(np.abs(self.samples) ** 2, axis=0)))

    def scaled(self, gain: float) -> "WaveformMatrix":
        return WaveformMatrix(self.samples * gain, self.normalization_mode, self.seed_used)


@dataclass(frozen=True)
class JammerWaveform:
    """Jammer samples for each pulse, shape (N_p, L). Entries have variance 1/L."""

    pulses: np.ndarray

    @property
    def num_pulses(self) -> int:
        return self.pulses.shape[0]


def modified_gram_schmidt(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    q = np.array(a, dtype=complex)
    for i in range(q.shape[1]):
        for j in range(i):
            q[:, i] -= (q[:, j].conj() @ q[:, i]) * q[:, j]
        nrm = np.linalg.norm(q[:, i])
        if nrm <= rtol * max(np.linalg.norm(a[:, i]), 1e-300):
            raise RankDeficientWaveform(f"column {i} is linearly dependent")
        q[:, i] /= nrm
    return q


def _qpsk_symbols(rng: np.random.Generator, shape) -> np.ndarray:
    bits = rng.integers(0, 2, size=(2,) + tuple(shape))
    return ((2 * bits[0] - 1) + 1j * (2 * bits[1] - 1)) / np.sqrt(2.0)


def generate_qpsk(L: int, m_t: int, mode: str = RAW_QPSK, rng_seed=0,
                  max_redraws: int = 16) -> WaveformMatrix:
    """Independent QPSK waveform per transmit node.

    ``raw_qpsk`` entries are unit-modulus symbols divided by sqrt(L), so every
    column has unit norm. ``column_orthonormal`` additionally orthonormalizes
    the columns so that X^H X = I. A rank-deficient draw is re-drawn with the
    next seed.
    """
    if mode not in NORMALIZATION_MODES:
        raise ValueError(f"unknown normalization mode {mode!r}")
    if L < 1 or m_t < 1:
        raise ValueError("L and m_t must be >= 1")
    if mode == COLUMN_ORTHONORMAL and L < m_t:
        raise ValueError("column_orthonormal mode requires L >= m_t")

    seed = rng_seed
    for attempt in range(max_redraws):
        rng = np.random.default_rng(seed)
        x = _qpsk_symbols(rng, (L, m_t)) / np.sqrt(L)
        if mode == RAW_QPSK:
            return WaveformMatrix(x, mode, seed)
        try:
            return WaveformMatrix(modified_gram_schmidt(x), mode, seed)
        except RankDeficientWaveform:
            log.warning("rank-deficient QPSK draw for seed %s, re-drawing", seed)
            seed = (seed + 1) if isinstance(seed, (int, np.integer)) else \
                np.random.SeedSequence(seed).spawn(1)[0]
    raise RankDeficientWaveform(f"no full-rank draw after {max_redraws} attempts")


def complex_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """Circular complex Gaussian; real and imaginary parts each carry variance/2."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_jammer_waveform(L: int, n_p: int, rng_seed=0) -> JammerWaveform:
    rng = np.random.default_rng(rng_seed)
    return JammerWaveform(complex_gaussian(rng, (n_p, L), 1.0 / L))


def generate_noise(L: int, variance: float, rng_seed=0) -> np.ndarray:
    if variance < 0:
        raise ValueError("noise variance must be nonnegative")
    if variance == 0:
        return np.zeros(L, dtype=complex)
    return complex_gaussian(np.random.default_rng(rng_seed), L, variance)


def noise_variance_for_snr(snr_db: float, L: int) -> float:
    """Per-sample noise variance sigma^2 / L with sigma^2 = 10^(-SNR/10).

    A unit-norm waveform column spreads unit energy over L samples, so the
    per-sample waveform power is 1/L and the ratio of the two is 10^(SNR/10).
    """
    return 10.0 ** (-snr_db / 10.0) / L


def seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, None or an existing SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
