"""Signal-to-jammer analysis: Bessel identities, analytic SJR and Monte Carlo ensembles."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .scene import Jammer, RadarParams, sample_node_placement
from .sensing import GAUSSIAN, MODIFIED, generate_measurement_matrix
from .signal import synthesize_all
from .waveform import COLUMN_ORTHONORMAL, generate_jammer_waveform, generate_qpsk, seed_sequence

log = logging.getLogger(__name__)

STANDARD = "standard"
SJR_KINDS = (STANDARD, MODIFIED)

_SERIES_CUTOFF = 12.0


def _j1_series(x: float) -> float:
    half = x / 2.0
    term = half
    total = term
    k = 0
    while abs(term) > 1e-17 * max(abs(total), 1e-300):
        k += 1
        term *= -(half * half) / (k * (k + 1))
        total += term
        if k > 200:
            break
    return total


def _j1_asymptotic(x: float) -> float:
    """Hankel expansion sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - 3 pi / 4."""
    mu = 4.0
    p, q = 0.0, 0.0
    term = 1.0
    k = 0
    while True:
        # term_k = prod_{i<k} (mu - (2i+1)^2) / (k! (8x)^k)
        if k % 2 == 0:
            p += (-1) ** (k // 2) * term
        else:
            q += (-1) ** (k // 2) * term
        nxt = term * (mu - (2 * k + 1) ** 2) / ((k + 1) * 8.0 * x)
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17 or k > 60:
            break
        term = nxt
        k += 1
    chi = x - 0.75 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def j1(x):
    """Bessel function of the first kind, order one (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    flat = arr.ravel()
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        a = abs(v)
        val = _j1_series(a) if a < _SERIES_CUTOFF else _j1_asymptotic(a)
        out[i] = val if v >= 0 else -val  # J1 is odd
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def jinc(alpha):
    """2 J1(alpha) / alpha with the limit 1 at alpha = 0."""
    a = np.asarray(alpha, dtype=float)
    safe = np.where(a == 0, 1.0, a)
    out = np.where(a == 0, 1.0, 2.0 * j1(safe) / safe)
    return out if out.ndim else float(out)


def disk_projection_samples(num_samples: int, rng_seed=0) -> np.ndarray:
    """h = (rho / r) sin(alpha - psi0) for nodes uniform on the disk (psi0 = 0)."""
    rng = np.random.default_rng(rng_seed)
    rho = np.sqrt(rng.random(num_samples))
    ang = rng.uniform(-np.pi, np.pi, num_samples)
    return rho * np.sin(ang)


def projection_cdf(h):
    """CDF of the density (2/pi) sqrt(1 - h^2) on (-1, 1)."""
    h = np.clip(np.asarray(h, dtype=float), -1.0, 1.0)
    return 0.5 + (h * np.sqrt(1.0 - h * h) + np.arcsin(h)) / np.pi


def bessel_expectation_check(alpha: float, num_samples: int = 1_000_000, rng_seed=0):
    """(Monte Carlo mean of exp(j alpha h), 2 J1(alpha) / alpha)."""
    h = disk_projection_samples(num_samples, rng_seed)
    empirical = complex(np.mean(np.exp(1j * alpha * h)))
    return empirical, jinc(alpha)


def varsigma(x, radius_m: float, wavelength_m: float):
    """2 J1(x pi r / lambda) / (x pi r / lambda)."""
    return jinc(np.asarray(x, dtype=float) * math.pi * radius_m / wavelength_m)


def pulse_sum(doppler_a_hz: float, doppler_b_hz: float, n_p: int, pri_s: float) -> complex:
    """sum_{m=0}^{N_p-1} exp(-j 2 pi (f_a - f_b) m T)."""
    m = np.arange(n_p)
    return complex(np.sum(np.exp(-2j * np.pi * (doppler_a_hz - doppler_b_hz) * m * pri_s)))


def cross_term(targets, params: RadarParams, n_p: int = 1) -> float:
    """phi: placement-averaged cross-target power, normalized per pulse.

    sum_{k != k'} beta_k^* beta_k' exp(j 4 pi / lambda (d_k - d_k')) vs_kk'^2 mu_kk' / N_p,
    with vs_kk' = varsigma(4 sin((theta_k' - theta_k) / 2)).
    """
    lam = params.wavelength_m
    total = 0.0 + 0.0j
    for k, tk in enumerate(targets):
        for kk, tkk in enumerate(targets):
            if k == kk:
                continue
            vs = varsigma(4.0 * math.sin((tkk.azimuth_rad - tk.azimuth_rad) / 2.0), params.disk_radius_m, lam)
            mu = pulse_sum(float(params.doppler_hz(tk.radial_speed_mps)), float(params.doppler_hz(tkk.radial_speed_mps)),
                           n_p, params.pulse_repetition_s)
            rng_phase = np.exp(4j * math.pi / lam * (tk.initial_range_m - tkk.initial_range_m))
            total += np.conj(tk.reflectivity) * tkk.reflectivity * rng_phase * vs ** 2 * mu / n_p
    return float(total.real)


@dataclass(frozen=True)
class SjrReport:
    analytic_standard: float
    analytic_modified: float
    empirical: float
    signal_power: float
    jammer_power: float
    cross_term: float
    kind: str = STANDARD

    def __post_init__(self):
        if self.signal_power < 0 or self.jammer_power < 0:
            raise ValueError("powers must be nonnegative")

    @property
    def analytic(self) -> float:
        return self.analytic_standard if self.kind == STANDARD else self.analytic_modified


def analytic_sjr(params: RadarParams, targets, jammer: Jammer | None, L: int, M: int, m_t: int,
                 n_p: int = 1, kind: str = STANDARD, column_energy: float = 1.0) -> SjrReport:
    """Placement-averaged SJR for the standard and the modified measurement matrix.

    Standard: M_t (sum |beta_k|^2 + phi) / |beta|^2, independent of M and N_p.
    Modified: L (sum |beta_k|^2 + phi) / |beta|^2. ``column_energy`` is the
    mean squared column norm of X (1 for orthonormal columns); it scales the
    signal powers but cancels in the ratios.
    """
    if kind not in SJR_KINDS:
        raise ValueError(f"unknown SJR kind {kind!r}")
    for t in targets:
        ft = abs(float(params.doppler_hz(t.radial_speed_mps))) * params.pulse_repetition_s
        if ft > 0.5:
            log.warning("target at %.1f m/s is not slow relative to the pulse rate (f T = %.2f)",
                        t.radial_speed_mps, ft)
    phi = cross_term(targets, params, n_p)
    total = float(sum(abs(t.reflectivity) ** 2 for t in targets)) + phi
    beta2 = 0.0 if jammer is None else jammer.amplitude ** 2
    p_j = n_p * beta2 * M / L
    p_s = n_p * M * column_energy * total * (m_t / L if kind == STANDARD else 1.0)
    if beta2 == 0:
        std = mod = np.inf
    else:
        std = m_t * total / beta2
        mod = L * total / beta2
    return SjrReport(std, mod, np.nan, p_s, p_j, phi, kind)


@dataclass
class SjrEnsemble:
    """Per-trial compressed signal-only and jammer-only powers."""

    signal_powers: np.ndarray
    jammer_powers: np.ndarray
    kind: str = STANDARD


def simulate_sjr_ensemble(params: RadarParams, targets, jammer: Jammer | None, m_t: int, M: int,
                          n_p: int, trials: int, kind: str = STANDARD,
                          waveform_mode: str = COLUMN_ORTHONORMAL, rng_seed=0) -> SjrEnsemble:
    """Monte Carlo over placements, waveforms, measurement matrices and jammer waveforms.

    Each trial draws one receive node and one measurement matrix reused over
    the N_p pulses, then records ||Phi z_s||^2 and ||Phi z_j||^2 summed over
    pulses for the target-only and jammer-only snapshots.
    """
    if kind not in SJR_KINDS:
        raise ValueError(f"unknown SJR kind {kind!r}")
    L = params.snapshots_per_pulse
    ps = np.zeros(trials)
    pj = np.zeros(trials)
    for i, ss in enumerate(seed_sequence(rng_seed).spawn(trials)):
        s_place, s_wave, s_phi, s_jam = ss.spawn(4)
        placement = sample_node_placement(params, m_t, 1, s_place)
        x = generate_qpsk(L, m_t, waveform_mode, s_wave)
        phi = generate_measurement_matrix(GAUSSIAN if kind == STANDARD else MODIFIED, M, L, x, rng_seed=s_phi)
        zs = synthesize_all(params, placement, targets, x, n_p)[0]
        ps[i] = np.sum(np.abs(zs @ phi.matrix.T) ** 2)
        if jammer is not None and jammer.amplitude > 0:
            jw = generate_jammer_waveform(L, n_p, s_jam)
            zj = synthesize_all(params, placement, (), x, n_p, jammer, jw)[0]
            pj[i] = np.sum(np.abs(zj @ phi.matrix.T) ** 2)
    return SjrEnsemble(ps, pj, kind)


def empirical_sjr(ensemble: SjrEnsemble) -> float:
    """Mean compressed signal power over mean compressed jammer power."""
    if len(ensemble.signal_powers) == 0:
        raise ValueError("empirical SJR needs at least one trial")
    pj = float(np.mean(ensemble.jammer_powers))
    if pj == 0:
        return np.inf
    return float(np.mean(ensemble.signal_powers)) / pj
