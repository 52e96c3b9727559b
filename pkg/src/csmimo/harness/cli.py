"""Command line entry point: run, sjr, gridsel and correlate subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from ..analysis import MODIFIED, STANDARD, analytic_sjr, empirical_sjr, simulate_sjr_ensemble
from ..scene import Jammer, RadarParams, Target, sample_node_placement
from ..sensing import (GAUSSIAN, generate_measurement_matrix, pulse_correlation_study,
                       receive_correlation_study, select_grid_step, transmit_correlation_study)
from ..waveform import COLUMN_ORTHONORMAL, generate_qpsk, seed_sequence
from .config import ConfigError, ScenarioConfig, preset, preset_names
from .io import emit_results
from .runner import run_scenario

log = logging.getLogger("csmimo")

DEFAULT_STEPS_DEG = "1.0,0.8,0.6,0.5,0.4,0.3,0.2,0.1,0.08,0.05,0.02"


def _common(p: argparse.ArgumentParser, trials_default=None):
    p.add_argument("--seed", type=int, default=None, help="base seed (trial t uses seed + t)")
    p.add_argument("--trials", type=int, default=trials_default, help="number of Monte Carlo trials")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--baselines", default=None,
                   help="comma-separated baseline methods (matched_filter, capon, music) or 'none'")
    p.add_argument("--measurement", choices=("gaussian", "modified"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csmimo", description="Compressive-sensing MIMO radar experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a JSON config or a named preset")
    run.add_argument("config", nargs="?", help="scenario JSON file")
    run.add_argument("--preset", help=f"one of: {', '.join(preset_names())}")
    _common(run)

    sjr = sub.add_parser("sjr", help="analytic versus Monte Carlo signal-to-jammer ratio")
    _common(sjr, 2000)
    sjr.add_argument("--m-t", type=int, default=30)
    sjr.add_argument("--M", type=int, default=30)
    sjr.add_argument("--n-p", type=int, default=1)
    sjr.add_argument("--jammer-power", type=float, default=400.0)
    sjr.add_argument("--targets-deg", default="0.2,-0.2")

    grid = sub.add_parser("gridsel", help="pick the coarsest grid step meeting a capture correlation")
    _common(grid)
    grid.add_argument("--threshold", type=float, default=0.9)
    grid.add_argument("--steps-deg", default=DEFAULT_STEPS_DEG, help="candidate angle steps, coarsest first")
    grid.add_argument("--m-t", type=int, default=30)
    grid.add_argument("--M", type=int, default=30)

    corr = sub.add_parser("correlate", help="column-correlation studies over N_r, M_t and N_p")
    _common(corr, 200)
    corr.add_argument("--study", choices=("n_r", "m_t", "n_p", "all"), default="all")
    return parser


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.measurement is not None:
        changes["measurement"] = args.measurement
    if args.baselines is not None:
        changes["baselines"] = [] if args.baselines.strip() in ("", "none") else \
            [b.strip() for b in args.baselines.split(",")]
    return cfg.replace(**changes) if changes else cfg


def cmd_run(args) -> dict:
    if bool(args.config) == bool(args.preset):
        raise ConfigError(["give exactly one of a config file or --preset"])
    configs = preset(args.preset) if args.preset else [ScenarioConfig.load(args.config)]
    configs = [_apply_overrides(c, args).validate() for c in configs]
    base = args.out or os.path.join("results", args.preset or configs[0].name)
    runs = []
    for cfg in configs:
        out = base if len(configs) == 1 else os.path.join(base, cfg.name)
        result = run_scenario(cfg)
        paths = emit_results(result, out)
        runs.append({"scenario": cfg.name, "out": out, "summary": paths["summary"],
                     "top_k_rate": result.summary["methods"]["cs"]["top_k_rate"]})
    return {"runs": runs}


def _finite(x):
    return None if x is None or not math.isfinite(x) else x


def cmd_sjr(args) -> dict:
    if args.trials is None or args.trials < 1:
        raise ConfigError(["sjr needs --trials >= 1"])
    params = RadarParams(num_pulses=args.n_p)
    targets = [Target(np.radians(float(a))) for a in args.targets_deg.split(",") if a.strip()]
    jammer = Jammer(np.radians(7.0), amplitude=math.sqrt(args.jammer_power))
    seed = 0 if args.seed is None else args.seed
    L = params.snapshots_per_pulse
    report = analytic_sjr(params, targets, jammer, L, args.M, args.m_t, args.n_p, STANDARD)
    out = {"analytic_standard": report.analytic_standard, "analytic_modified": report.analytic_modified,
           "cross_term": report.cross_term, "analytic_jammer_power": report.jammer_power, "trials": args.trials}
    kinds = [STANDARD, MODIFIED] if args.measurement is None else \
        [STANDARD if args.measurement == GAUSSIAN else MODIFIED]
    for kind in kinds:
        ens = simulate_sjr_ensemble(params, targets, jammer, args.m_t, args.M, args.n_p, args.trials, kind,
                                    COLUMN_ORTHONORMAL, seed)
        out[f"empirical_{kind}"] = _finite(empirical_sjr(ens))
        out[f"empirical_jammer_power_{kind}"] = float(np.mean(ens.jammer_powers))
    if len(kinds) == 2:
        out["empirical_gain"] = out["empirical_modified"] / out["empirical_standard"]
        out["analytic_gain"] = L / args.m_t
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "sjr.json"), "w") as fh:
            json.dump(out, fh, sort_keys=True, indent=2)
    return out


def cmd_gridsel(args) -> dict:
    if not 0 <= args.threshold < 1:
        raise ConfigError(["--threshold must lie in [0, 1)"])
    params = RadarParams()
    seed = 0 if args.seed is None else args.seed
    s_place, s_wave, s_phi = seed_sequence(seed).spawn(3)
    placement = sample_node_placement(params, args.m_t, 1, s_place)
    x = generate_qpsk(params.snapshots_per_pulse, args.m_t, rng_seed=s_wave)
    meas = None
    if args.measurement is not None:
        meas = [generate_measurement_matrix(args.measurement, args.M, params.snapshots_per_pulse, x, rng_seed=s_phi)]
    steps = [(np.radians(float(s)), 0.0) for s in args.steps_deg.split(",")]
    sel = select_grid_step(params, placement, x, steps, args.threshold, measurements=meas)
    return {"threshold": args.threshold, "feasible": sel.feasible,
            "selected_step_deg": None if sel.step is None else float(np.degrees(sel.step[0])),
            "average_correlation": {f"{np.degrees(k[0]):.4g}": v for k, v in sel.average_correlation.items()}}


def cmd_correlate(args) -> dict:
    params = RadarParams()
    seeds = 200 if args.trials is None else args.trials
    seed = 0 if args.seed is None else args.seed
    studies = {"n_r": receive_correlation_study, "m_t": transmit_correlation_study, "n_p": pulse_correlation_study}
    chosen = list(studies) if args.study == "all" else [args.study]
    out = {}
    for name in chosen:
        res = studies[name](params, seeds=seeds, rng_seed=seed)
        out[name] = {"values": list(res.values), "averages": list(res.averages)}
    return out


COMMANDS = {"run": cmd_run, "sjr": cmd_sjr, "gridsel": cmd_gridsel, "correlate": cmd_correlate}


def _error(kind: str, message: str, issues=None) -> int:
    payload = {"error": {"type": kind, "message": message, "issues": list(issues or [])}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return 2 if kind == "ConfigError" else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        out = COMMANDS[args.command](args)
    except ConfigError as exc:
        return _error("ConfigError", str(exc), exc.issues)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _error(type(exc).__name__, str(exc))
    print(json.dumps(out, sort_keys=True, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
