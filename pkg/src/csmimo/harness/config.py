"""Scenario configuration: JSON schema, validation and named figure presets.

Angles are given in degrees and speeds in m/s; they are converted to
radians and Hz when the scenario is built.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..baselines import METHODS, MUSIC
from ..scene import Jammer, RadarParams, Scene, Target
from ..sensing import GAUSSIAN, MODIFIED, AngleDopplerGrid
from ..solver.dantzig import EXPLICIT, LOWER_BOUND_SCALED
from ..waveform import COLUMN_ORTHONORMAL, RAW_QPSK

BASELINE_FULL = "full"
BASELINE_COMPRESSED = "compressed"


class ConfigError(ValueError):
    """Invalid scenario; ``issues`` lists every failed check."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass
class TargetSpec:
    azimuth_deg: float
    speed_mps: float = 0.0
    range_m: float = 10e3
    reflectivity: float = 1.0


@dataclass
class JammerSpec:
    azimuth_deg: float = 7.0
    power: float = 400.0  # beta^2
    range_m: float = 10e3


@dataclass
class GridSpec:
    angle_min_deg: float = -8.0
    angle_max_deg: float = 8.0
    angle_step_deg: float = 0.2
    speed_min_mps: float = 0.0
    speed_max_mps: float = 0.0
    speed_step_mps: float = 0.0


@dataclass
class ScenarioConfig:
    name: str = "custom"
    carrier_freq_hz: float = 5e9
    sample_period_s: float = 1.0 / 20e6
    pulse_repetition_s: float = 1.0 / 4000
    snapshots_per_pulse: int = 512
    disk_radius_m: float = 10.0
    m_t: int = 30
    n_r: int = 1
    n_p: int = 1
    M: int = 30
    grid: GridSpec = field(default_factory=GridSpec)
    targets: list = field(default_factory=list)
    jammer: JammerSpec | None = None
    snr_db: float | None = 0.0
    mu_policy: str = EXPLICIT
    mu: float | None = 26.0
    t_scalar: float = 3.0
    measurement: str = GAUSSIAN
    orthonormal_rows: bool = False
    waveform_mode: str = RAW_QPSK
    unit_modulus_symbols: bool = True
    intra_pulse_doppler: bool = True
    trials: int = 100
    seed: int = 0
    baselines: list = field(default_factory=list)
    baseline_budget: str = BASELINE_FULL
    redraw_placement: bool = False
    tau: float = 0.5
    tau_sweep: list = field(default_factory=list)
    spectrum_trials: int = 1

    # ---- conversion -------------------------------------------------------------------
    def radar_params(self) -> RadarParams:
        return RadarParams(self.carrier_freq_hz, self.sample_period_s, self.pulse_repetition_s,
                           self.snapshots_per_pulse, self.n_p, self.disk_radius_m)

    def scene_targets(self) -> tuple:
        return tuple(Target(np.radians(t.azimuth_deg), t.speed_mps, t.range_m, t.reflectivity)
                     for t in self.targets)

    def scene_jammer(self) -> Jammer | None:
        if self.jammer is None or self.jammer.power == 0:
            return None
        return Jammer(np.radians(self.jammer.azimuth_deg), self.jammer.range_m, float(np.sqrt(self.jammer.power)))

    def build_grid(self, params: RadarParams | None = None) -> AngleDopplerGrid:
        g = self.grid
        return AngleDopplerGrid.from_degrees(params or self.radar_params(), g.angle_min_deg, g.angle_max_deg,
                                             g.angle_step_deg, g.speed_min_mps, g.speed_max_mps,
                                             g.speed_step_mps or None)

    # ---- serialization ----------------------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([f"unknown field {k!r}" for k in unknown])
        try:
            if "grid" in data and data["grid"] is not None:
                data["grid"] = GridSpec(**data["grid"])
            data["targets"] = [TargetSpec(**t) for t in data.get("targets", [])]
            if data.get("jammer") is not None:
                data["jammer"] = JammerSpec(**data["jammer"])
        except TypeError as exc:
            raise ConfigError([str(exc)]) from exc
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def scenario_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    # ---- validation -------------------------------------------------------------------
    def validate(self) -> "ScenarioConfig":
        issues = []
        for name in ("m_t", "n_r", "n_p", "M", "snapshots_per_pulse"):
            if int(getattr(self, name)) < 1:
                issues.append(f"{name} must be >= 1")
        if self.M >= self.snapshots_per_pulse:
            issues.append("M must be smaller than L (snapshots_per_pulse)")
        if self.measurement not in (GAUSSIAN, MODIFIED):
            issues.append(f"unknown measurement kind {self.measurement!r}")
        elif self.measurement == MODIFIED and self.M > self.m_t:
            issues.append("modified measurement requires M <= m_t")
        if self.waveform_mode not in (RAW_QPSK, COLUMN_ORTHONORMAL):
            issues.append(f"unknown waveform mode {self.waveform_mode!r}")
        if self.mu_policy not in (EXPLICIT, LOWER_BOUND_SCALED):
            issues.append(f"unknown mu policy {self.mu_policy!r}")
        elif self.mu_policy == EXPLICIT and (self.mu is None or not self.mu > 0):
            issues.append("explicit mu must be positive")
        if not self.t_scalar > 0:
            issues.append("t_scalar must be positive")
        if self.trials < 0:
            issues.append("trials must be >= 0")
        if not 0 < self.tau <= 1 or any(not 0 < t <= 1 for t in self.tau_sweep):
            issues.append("thresholds tau must lie in (0, 1]")
        if self.baseline_budget not in (BASELINE_FULL, BASELINE_COMPRESSED):
            issues.append(f"unknown baseline budget {self.baseline_budget!r}")
        for b in self.baselines:
            if b not in METHODS:
                issues.append(f"unknown baseline {b!r}")
        sources = len(self.targets) + (1 if self.jammer is not None and self.jammer.power > 0 else 0)
        if MUSIC in self.baselines and self.n_r <= sources:
            issues.append(f"MUSIC needs n_r > number of sources ({sources})")
        if self.jammer is not None and self.jammer.power < 0:
            issues.append("jammer power must be nonnegative")
        g = self.grid
        if not g.angle_step_deg > 0 or g.angle_max_deg < g.angle_min_deg:
            issues.append("angle grid needs a positive step and max >= min")
        if g.speed_step_mps < 0 or g.speed_max_mps < g.speed_min_mps:
            issues.append("speed grid needs a nonnegative step and max >= min")
        try:
            params = self.radar_params()
        except ValueError as exc:
            issues.append(str(exc))
            params = None
        if params is not None and not issues:
            try:
                self.build_grid(params)
            except ValueError as exc:
                issues.append(f"grid: {exc}")
            try:
                Scene(params, self.scene_targets(), self.scene_jammer()).check()
            except ValueError as exc:
                issues.append(f"scene: {exc}")
        if issues:
            raise ConfigError(issues)
        return self


# ---- presets ---------------------------------------------------------------------------

def _pair(d_deg: float, upper: float = 0.2):
    return [TargetSpec(upper), TargetSpec(upper - d_deg)]


def _stationary(name, n_r, power, mu, snr_db=0.0, targets=None, grid=None, **kw) -> ScenarioConfig:
    base = dict(name=name, n_r=n_r, jammer=JammerSpec(7.0, power), mu=mu, snr_db=snr_db,
                targets=targets or [TargetSpec(0.2), TargetSpec(-0.2)], grid=grid or GridSpec(),
                trials=1000, baselines=["matched_filter", "capon"] + (["music"] if n_r > 3 else []))
    base.update(kw)
    return ScenarioConfig(**base)


def _moving(name, targets, angle_step, mu, **kw) -> ScenarioConfig:
    base = dict(name=name, n_r=1, n_p=5, jammer=JammerSpec(7.0, 400.0), mu=mu, snr_db=0.0,
                targets=targets, grid=GridSpec(-8.0, 8.0, angle_step, 50.0, 110.0, 5.0),
                trials=100, baselines=["matched_filter"])
    base.update(kw)
    return ScenarioConfig(**base)


def _build_presets() -> dict:
    p = {}
    p["fig2"] = [_stationary("fig2", 1, 400.0, 26.0)]
    p["fig4"] = [_stationary(f"fig4-beta{b}", 10, b * b, mu) for b, mu in ((20, 120.0), (40, 190.0), (60, 280.0))]
    p["fig5"] = [_stationary(f"fig5-nr{n}", n, 3600.0, mu) for n, mu in ((10, 280.0), (30, 800.0))]
    fine = GridSpec(angle_step_deg=0.1)
    p["fig6"] = [_stationary(f"fig6-d{d}", 10, 3600.0, mu, targets=_pair(d), grid=fine)
                 for d, mu in ((0.4, 280.0), (0.3, 260.0), (0.2, 280.0))]
    p["fig7"] = [_stationary(f"fig7-beta{b}", 20, b * b, mu, snr_db=-40.0)
                 for b, mu in ((20, 350.0), (40, 440.0), (60, 550.0))]
    sweep = [round(0.1 * k, 1) for k in range(1, 10)]
    p["fig9"] = [_stationary(f"fig9-beta{b}", 20, b * b, mu, snr_db=-40.0, trials=8000, tau_sweep=sweep)
                 for b, mu in ((20, 350.0), (60, 550.0))]
    p["fig12"] = [_moving("fig12", [TargetSpec(-1.0, 60.0), TargetSpec(0.0, 70.0), TargetSpec(1.0, 80.0)],
                          0.5, 60.0)]
    p["fig13"] = [_moving("fig13", [TargetSpec(-1.1, 62.5), TargetSpec(0.1, 72.5), TargetSpec(1.1, 82.5)],
                          0.2, 60.0)]
    return p


PRESETS = _build_presets()


def preset_names() -> list:
    names = []
    for key, cases in PRESETS.items():
        names.append(key)
        names.extend(c.name for c in cases if c.name != key)
    return names


def preset(name: str) -> list:
    """Configs for a figure preset (every case) or for one named case."""
    if name in PRESETS:
        return [ScenarioConfig.from_dict(c.to_dict()) for c in PRESETS[name]]
    for cases in PRESETS.values():
        for c in cases:
            if c.name == name:
                return [ScenarioConfig.from_dict(c.to_dict())]
    raise ConfigError([f"unknown preset {name!r}; choose from {', '.join(preset_names())}"])
