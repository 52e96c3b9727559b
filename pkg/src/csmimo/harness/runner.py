"""Monte Carlo execution of a scenario: one independent, seeded state per trial."""

from __future__ import annotations

import logging
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..baselines import CAPON, MATCHED_FILTER, MUSIC, covariance_spectrum, matched_filter
from ..metrics import TrialMetrics, mse_pfa, pjr, prr
from ..scene import sample_node_placement
from ..sensing import build_sensing_problem, generate_node_measurements
from ..signal import synthesize_all
from ..solver.dantzig import DantzigConfig, effective_noise_variance, solve_dantzig, top_indices
from ..waveform import generate_jammer_waveform, generate_qpsk, noise_variance_for_snr
from .config import BASELINE_COMPRESSED, ScenarioConfig

log = logging.getLogger(__name__)

CS = "cs"
WORKERS_ENV = "CSMIMO_WORKERS"
# comparison methods whose formulas are not available here; listed in every summary
UNAVAILABLE_BASELINES = ("apes", "glrt")


@dataclass
class TrialRecord:
    trial: int
    seed: int
    scenario_hash: str
    metrics: dict                      # method -> TrialMetrics or None when the trial failed
    top_k_correct: dict                # method -> bool
    diagnostics: dict                  # solver status, iterations, residual, mu, objective
    wall_ms: float = 0.0
    tau_sweep: dict = field(default_factory=dict)     # method -> [(mse, pfa), ...]
    spectra: dict = field(default_factory=dict)       # method -> |estimate| per grid point


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    records: list
    summary: dict


def _locate(grid, angle_rad, doppler_hz):
    """Index of the grid cell holding (angle, Doppler); nearest cell within half a step, else None."""
    hit = grid.find(angle_rad, doppler_hz)
    if hit is not None:
        return hit
    idx = grid.nearest(angle_rad, doppler_hz)
    if abs(grid.angles_rad[idx] - angle_rad) > 0.5 * (grid.angle_step or 0) + 1e-12:
        return None
    if abs(grid.dopplers_hz[idx] - doppler_hz) > 0.5 * (grid.doppler_step or 0) + 1e-9:
        return None
    return idx


def truth_cells(config: ScenarioConfig, grid, params):
    """(target cell indices, jammer cell index or None) on the scenario grid."""
    cells = []
    for t in config.scene_targets():
        idx = _locate(grid, t.azimuth_rad, float(params.doppler_hz(t.radial_speed_mps)))
        if idx is not None and idx not in cells:
            cells.append(idx)
    jam = config.scene_jammer()
    jidx = None if jam is None else _locate(grid, jam.azimuth_rad, 0.0)
    if jidx in cells:
        jidx = None
    return cells, jidx


def _evaluate(amplitude, cells, jidx, tau, sweep):
    metrics = TrialMetrics(prr(amplitude, cells, jidx),
                           math.nan if jidx is None else pjr(amplitude, cells, jidx),
                           *mse_pfa(amplitude, cells, tau),
                           detected_support=tuple(int(i) for i in np.flatnonzero(np.abs(amplitude) > 0)[:64]))
    correct = bool(cells) and set(top_indices(amplitude, len(cells)).tolist()) == set(cells)
    return metrics, correct, [mse_pfa(amplitude, cells, t) for t in sweep]


def trial_seed(config: ScenarioConfig, trial: int) -> int:
    return int(config.seed) + int(trial)


@dataclass
class TrialData:
    """Everything drawn for one trial, up to the assembled sensing problem."""

    params: object
    grid: object
    placement: object
    waveforms: object
    measurements: list
    jammer: object
    received: np.ndarray
    noise_variance: float
    problem: object


def simulate_trial(config: ScenarioConfig, trial: int) -> TrialData:
    """Draw placement, waveforms, measurements, jammer and noise for one trial and build Theta."""
    seed = trial_seed(config, trial)
    ss_place, ss_wave, ss_phi, ss_jam, ss_noise = np.random.SeedSequence(seed).spawn(5)
    if not config.redraw_placement:
        ss_place = np.random.SeedSequence(int(config.seed)).spawn(1)[0]
    params = config.radar_params()
    grid = config.build_grid(params)
    L = params.snapshots_per_pulse
    placement = sample_node_placement(params, config.m_t, config.n_r, ss_place)
    x = generate_qpsk(L, config.m_t, config.waveform_mode, ss_wave)
    if config.unit_modulus_symbols:
        x = x.scaled(math.sqrt(L))
    phis = generate_node_measurements(config.measurement, config.M, L, config.n_r, config.n_p, x,
                                      config.orthonormal_rows, True, ss_phi)
    jammer = config.scene_jammer()
    jwf = generate_jammer_waveform(L, config.n_p, ss_jam) if jammer is not None else None
    noise_var = 0.0 if config.snr_db is None else noise_variance_for_snr(config.snr_db, L)
    received = synthesize_all(params, placement, config.scene_targets(), x, config.n_p, jammer, jwf,
                              noise_var, ss_noise)
    problem = build_sensing_problem(params, placement, x, grid, phis, received, config.intra_pulse_doppler)
    return TrialData(params, grid, placement, x, phis, jammer, received, noise_var, problem)


def dantzig_config(config: ScenarioConfig, data: TrialData) -> DantzigConfig:
    return DantzigConfig(config.mu, config.mu_policy, config.t_scalar,
                         effective_noise_variance(data.problem, data.noise_variance))


def run_trial(config: ScenarioConfig, trial: int) -> TrialRecord:
    """Simulate, recover and score one trial; failures are recorded, not raised."""
    start = time.perf_counter()
    record = TrialRecord(trial, trial_seed(config, trial), config.scenario_hash(), {}, {}, {})
    try:
        data = simulate_trial(config, trial)
        result = solve_dantzig(data.problem, dantzig_config(config, data))
        record.diagnostics = {"status": result.status, "iterations": result.iterations,
                              "residual_inf_norm": result.residual_inf_norm, "mu": result.mu,
                              "objective": result.objective}
        amplitudes = {CS: np.abs(result.estimate)}
        for method in config.baselines:
            if method == MATCHED_FILTER:
                meas = data.measurements if config.baseline_budget == BASELINE_COMPRESSED else None
                spec = matched_filter(data.received, data.placement, data.waveforms, data.grid, data.params, meas)
            else:
                k = len(config.targets) + (0 if data.jammer is None else 1)
                spec = covariance_spectrum(data.received, data.placement, data.waveforms, data.grid, data.params,
                                           method, num_sources=k if method == MUSIC else None)
            amplitudes[method] = np.sqrt(spec.values)
        cells, jidx = truth_cells(config, data.grid, data.params)
        for method, amp in amplitudes.items():
            m, ok, sweep = _evaluate(amp, cells, jidx, config.tau, config.tau_sweep)
            record.metrics[method] = m
            record.top_k_correct[method] = ok
            record.tau_sweep[method] = sweep
            if trial < config.spectrum_trials:
                record.spectra[method] = amp
    except Exception as exc:  # a failed trial must not abort the batch
        log.warning("trial %d failed: %s", trial, exc)
        record.diagnostics = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
        for method in [CS] + list(config.baselines):
            record.metrics.setdefault(method, None)
            record.top_k_correct.setdefault(method, False)
    record.wall_ms = (time.perf_counter() - start) * 1e3
    return record


def _run_chunk(args):
    config_dict, trials = args
    config = ScenarioConfig.from_dict(config_dict)
    return [run_trial(config, t) for t in trials]


def worker_count(trials: int) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"{WORKERS_ENV} must be an integer") from exc
    else:
        n = os.cpu_count() or 1
    return max(1, min(n, trials))


def run_scenario(config: ScenarioConfig, workers: int | None = None) -> ScenarioResult:
    """Run every trial (in parallel when several workers are available) and aggregate."""
    config.validate()
    trials = list(range(config.trials))
    workers = worker_count(len(trials)) if workers is None else max(1, min(workers, max(len(trials), 1)))
    if workers <= 1 or len(trials) <= 1:
        records = [run_trial(config, t) for t in trials]
    else:
        chunks = [trials[i::workers] for i in range(workers)]
        records = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, [(config.to_dict(), c) for c in chunks]):
                records.extend(part)
        records.sort(key=lambda r: r.trial)
    return ScenarioResult(config, records, summarize(config, records))


def _stat(values, fn):
    vals = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if vals.size == 0:
        return None
    return float(fn(vals))


def methods_of(config: ScenarioConfig) -> list:
    return [CS] + list(config.baselines)


def summarize(config: ScenarioConfig, records) -> dict:
    """Aggregate statistics in trial order; free of timing so it is reproducible."""
    methods = {}
    for method in methods_of(config):
        ms = [r.metrics.get(method) for r in records]
        ok = [m for m in ms if m is not None]
        prrs = [p for m in ok for p in m.prr_per_target]
        entry = {
            "valid_trials": len(ok),
            "prr_median": _stat(prrs, np.median),
            "pjr_median": _stat([m.pjr for m in ok], np.median),
            "mse_mean": _stat([m.mse for m in ok], np.mean),
            "pfa_mean": _stat([m.pfa for m in ok], np.mean),
            "top_k_rate": (sum(bool(r.top_k_correct.get(method)) for r in records) / len(records)) if records else None,
        }
        if config.tau_sweep:
            sweep = []
            for i, tau in enumerate(config.tau_sweep):
                pairs = [r.tau_sweep[method][i] for r in records if r.tau_sweep.get(method)]
                sweep.append({"tau": tau, "mse": _stat([p[0] for p in pairs], np.mean),
                              "pfa": _stat([p[1] for p in pairs], np.mean)})
            entry["tau_sweep"] = sweep
        methods[method] = entry
    statuses = Counter(r.diagnostics.get("status", "error") for r in records)
    iters = [r.diagnostics["iterations"] for r in records if "iterations" in r.diagnostics]
    return {
        "scenario": config.name,
        "scenario_hash": config.scenario_hash(),
        "config": config.to_dict(),
        "trials": len(records),
        "methods": methods,
        "unavailable_baselines": list(UNAVAILABLE_BASELINES),
        "solver": {"status_counts": dict(sorted(statuses.items())),
                   "mean_iterations": float(np.mean(iters)) if iters else None},
    }
