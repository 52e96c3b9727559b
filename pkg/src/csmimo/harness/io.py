"""Result files: per-trial CSVs, CDF CSVs, spectrum CSVs and the JSON summary.

trials.csv (compressed sensing) and trials_<method>.csv (baselines) share the
columns: trial, seed, prr_1..prr_K, pjr, mse, pfa, residual_inf_norm, status,
wall_ms. cdf_<metric>_<method>.csv holds value, cumulative_probability.
spectrum_trial<k>.csv holds angle_deg, doppler_mps and one magnitude column per
method. summary.json omits timing, which goes to timing.json.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from ..metrics import empirical_cdf
from .runner import CS, ScenarioResult, methods_of

CDF_HEADER = ["value", "cumulative_probability"]


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _clean(obj):
    """Replace NaN with null so the summary is valid JSON; infinities stay as Infinity."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def summary_json(summary: dict) -> str:
    return json.dumps(_clean(summary), sort_keys=True, indent=2) + "\n"


def trial_header(n_targets: int) -> list:
    return (["trial", "seed"] + [f"prr_{k + 1}" for k in range(n_targets)]
            + ["pjr", "mse", "pfa", "residual_inf_norm", "status", "wall_ms"])


def _trial_rows(result: ScenarioResult, method: str, n_targets: int):
    for r in result.records:
        m = r.metrics.get(method)
        prrs = list(m.prr_per_target) if m is not None else []
        prrs = (prrs + [math.nan] * n_targets)[:n_targets]
        if method == CS:
            resid = r.diagnostics.get("residual_inf_norm", math.nan)
            status = r.diagnostics.get("status", "error")
        else:
            resid = math.nan
            status = "ok" if m is not None else "error"
        vals = [m.pjr, m.mse, m.pfa] if m is not None else [math.nan] * 3
        yield [r.trial, r.seed] + prrs + vals + [resid, status, round(r.wall_ms, 3)]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def cdf_rows(samples):
    samples = [s for s in samples if not math.isnan(s)]
    return empirical_cdf(samples).rows() if samples else []


def emit_results(result: ScenarioResult, out_dir) -> dict:
    """Write every result file for one scenario; returns the written paths by role."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    cfg = result.config
    n_targets = len(cfg.targets)
    paths = {}
    for method in methods_of(cfg):
        name = "trials.csv" if method == CS else f"trials_{method}.csv"
        paths[f"trials_{method}"] = os.path.join(out_dir, name)
        write_csv(paths[f"trials_{method}"], trial_header(n_targets), _trial_rows(result, method, n_targets))
        ms = [r.metrics.get(method) for r in result.records]
        ms = [m for m in ms if m is not None]
        for metric, samples in (("prr", [p for m in ms for p in m.prr_per_target]), ("pjr", [m.pjr for m in ms])):
            key = f"cdf_{metric}_{method}"
            paths[key] = os.path.join(out_dir, f"{key}.csv")
            write_csv(paths[key], CDF_HEADER, cdf_rows(samples))
    params = cfg.radar_params()
    grid = cfg.build_grid(params)
    speeds = params.speed_mps(grid.dopplers_hz)
    for r in result.records:
        if not r.spectra:
            continue
        methods = [m for m in methods_of(cfg) if m in r.spectra]
        path = os.path.join(out_dir, f"spectrum_trial{r.trial}.csv")
        rows = ([a, v] + [float(r.spectra[m][n]) for m in methods]
                for n, (a, v) in enumerate(zip(grid.angles_deg.tolist(), np.asarray(speeds).tolist())))
        write_csv(path, ["angle_deg", "doppler_mps"] + methods, rows)
        paths[f"spectrum_trial{r.trial}"] = path
    if cfg.tau_sweep:
        path = os.path.join(out_dir, "tau_sweep.csv")
        rows = [[m, e["tau"], e["mse"], e["pfa"]] for m in methods_of(cfg)
                for e in result.summary["methods"][m]["tau_sweep"]]
        write_csv(path, ["method", "tau", "mse", "pfa"], rows)
        paths["tau_sweep"] = path
    paths["summary"] = os.path.join(out_dir, "summary.json")
    with open(paths["summary"], "w") as fh:
        fh.write(summary_json(result.summary))
    paths["timing"] = os.path.join(out_dir, "timing.json")
    with open(paths["timing"], "w") as fh:
        json.dump({"wall_ms": [round(r.wall_ms, 3) for r in result.records]}, fh)
    return paths


def load_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def read_cdf(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return [(float(a), float(b)) for a, b in rows[1:]]
