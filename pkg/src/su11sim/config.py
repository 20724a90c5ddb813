"""YAML run configuration.

Unknown keys are errors and every error carries the line of the offending
entry. Example::

    scenario:
      preset: paper-unbalanced
      theta: 0.0            # or pump_phase (theta = pump_phase / 2)
    kernel:
      shape: square         # square | single_pole
      t_r_slots: 25         # or t_r (seconds); single_pole takes f_3db (Hz)
    scan:
      variable: theta       # theta | pump_phase | delay_fraction | eta
      start: 0.0
      stop: 6.283185307179586
      points: 64
    engine: analytic        # analytic | montecarlo | both
    sampler: {n_samples: 1000000, seed: 1}
    lo_phase: 0.0
    output: out/
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import yaml

from su11sim.detection import DetectorKernel, default_dt
from su11sim.exceptions import ConfigError
from su11sim.interferometer import InterferometerSpec, preset, theta_from_pump_phase
from su11sim.modes import Band, PulseTrainSpec
from su11sim.montecarlo import SamplerConfig

ENGINES = ("analytic", "montecarlo", "both")
SCAN_VARIABLES = ("theta", "pump_phase", "delay_fraction", "eta")

_SCENARIO_KEYS = {
    "preset", "k1", "k2", "theta", "pump_phase", "delay_slots", "delay_band",
    "arm_loss_signal", "arm_loss_idler", "det_loss_signal", "det_loss_idler",
    "delta_t", "n_pulses",
}
_KERNEL_KEYS = {"shape", "t_r", "t_r_slots", "f_3db", "dt", "span"}
_SCAN_KEYS = {"variable", "start", "stop", "points", "endpoint"}
_SAMPLER_KEYS = {"n_samples", "seed", "batch"}
_JSF_KEYS = {
    "pump_bandwidth", "phasematch_bandwidth", "correlation_angle",
    "grid_start", "grid_stop", "grid_points", "csv", "n_modes",
}
_TOP_KEYS = {"scenario", "kernel", "scan", "engine", "sampler", "lo_phase", "output", "jsf"}
_SECTIONS = {
    "scenario": _SCENARIO_KEYS,
    "kernel": _KERNEL_KEYS,
    "scan": _SCAN_KEYS,
    "sampler": _SAMPLER_KEYS,
    "jsf": _JSF_KEYS,
}


@dataclass(frozen=True)
class KernelConfig:
    shape: str = "square"
    t_r: Optional[float] = None
    t_r_slots: Optional[float] = 25.0
    f_3db: Optional[float] = None
    dt: Optional[float] = None
    span: Optional[float] = None

    def response_time(self, delta_t: float) -> float:
        if self.shape == "single_pole":
            return 1.0 / (2 * np.pi * self.f_3db)
        return self.t_r if self.t_r is not None else self.t_r_slots * delta_t

    def make(self, delta_t: float, dt: Optional[float] = None) -> DetectorKernel:
        t_r = self.response_time(delta_t)
        dt = dt or self.dt or default_dt(delta_t, t_r)
        if self.shape == "square":
            return DetectorKernel.square(t_r, dt, self.span)
        return DetectorKernel.single_pole(self.f_3db, dt, self.span)


@dataclass(frozen=True)
class ScanConfig:
    variable: str = "theta"
    start: float = 0.0
    stop: float = 2 * np.pi
    points: int = 64
    endpoint: bool = False

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points, endpoint=self.endpoint)


@dataclass(frozen=True)
class JsfConfig:
    pump_bandwidth: float = 0.3
    phasematch_bandwidth: float = 2.0
    correlation_angle: float = 0.0
    grid_start: float = -6.0
    grid_stop: float = 6.0
    grid_points: int = 121
    csv: Optional[str] = None
    n_modes: int = 5


@dataclass(frozen=True)
class RunConfig:
    spec: InterferometerSpec
    kernel: KernelConfig = field(default_factory=KernelConfig)
    scan: Optional[ScanConfig] = None
    engine: str = "analytic"
    sampler: Optional[SamplerConfig] = None
    lo_phase: float = 0.0
    output: str = "su11sim-out"
    jsf: JsfConfig = field(default_factory=JsfConfig)
    scenario_name: str = "custom"

    def make_kernel(self, dt: Optional[float] = None) -> DetectorKernel:
        return self.kernel.make(self.spec.pulse_train.delta_t, dt)

    @property
    def uses_montecarlo(self) -> bool:
        return self.engine in ("montecarlo", "both")

    def to_dict(self) -> dict:
        spec = dataclasses.asdict(self.spec)
        spec["delay_band"] = self.spec.delay_band.value
        return {
            "scenario": self.scenario_name,
            "spec": spec,
            "kernel": dataclasses.asdict(self.kernel),
            "scan": dataclasses.asdict(self.scan) if self.scan else None,
            "engine": self.engine,
            "sampler": dataclasses.asdict(self.sampler) if self.sampler else None,
            "lo_phase": self.lo_phase,
            "jsf": dataclasses.asdict(self.jsf),
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=float)
        return hashlib.sha256(blob.encode()).hexdigest()


def _key_lines(node, path=(), out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = (*path, key_node.value)
            out[key] = key_node.start_mark.line + 1
            _key_lines(value_node, key, out)
    return out


def load_text(text: str) -> tuple[dict, dict]:
    """Parse YAML text; returns the data and a map from key path to line number."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"invalid YAML: {exc.problem}", line) from None
    if data is None:
        return {}, {}
    if not isinstance(data, dict):
        raise ConfigError("top level of the config must be a mapping", 1)
    return data, _key_lines(node)


class _Reader:
    def __init__(self, data: dict, lines: dict):
        self.data = data
        self.lines = lines

    def line(self, *path):
        while path:
            if path in self.lines:
                return self.lines[path]
            path = path[:-1]
        return None

    def section(self, name: str) -> dict:
        value = self.data.get(name, {})
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise ConfigError(f"'{name}' must be a mapping", self.line(name))
        unknown = set(value) - _SECTIONS[name]
        for key in sorted(unknown, key=lambda k: self.line(name, k) or 0):
            raise ConfigError(
                f"unknown key '{name}.{key}' (allowed: {', '.join(sorted(_SECTIONS[name]))})",
                self.line(name, key),
            )
        return value

    def number(self, section: str, key: str, value, kind=float):
        if isinstance(value, str):
            # YAML 1.1 reads exponent forms like 2e-8 as strings
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{section}.{key}' must be a number, got {value!r}", self.line(section, key))
        if kind is int:
            if int(value) != value:
                raise ConfigError(f"'{section}.{key}' must be an integer, got {value!r}", self.line(section, key))
            return int(value)
        return float(value)


def parse(
    data: dict,
    lines: Optional[dict] = None,
    preset_override: Optional[str] = None,
    default_preset: Optional[str] = None,
) -> RunConfig:
    """Build a :class:`RunConfig`; ``default_preset`` applies when the scenario names neither a preset nor gains."""
    r = _Reader(data, lines or {})
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(
                f"unknown key '{key}' (allowed: {', '.join(sorted(_TOP_KEYS))})", r.line(key)
            )

    sc = r.section("scenario")
    name = preset_override or sc.get("preset")
    if not name and not ({"k1", "k2"} & set(sc)):
        name = default_preset
    try:
        base = preset(name) if name else None
    except ConfigError as exc:
        raise ConfigError(str(exc), r.line("scenario", "preset")) from None
    values: dict[str, Any] = {}
    if base is not None:
        values = {f.name: getattr(base, f.name) for f in dataclasses.fields(base)}
    train = {"delta_t": values["pulse_train"].delta_t, "n_pulses": values["pulse_train"].n_pulses} if base else {}
    for key, value in sc.items():
        if key == "preset":
            continue
        if key == "delay_band":
            try:
                values[key] = Band(value)
            except ValueError:
                raise ConfigError(f"delay_band must be 'signal' or 'idler', got {value!r}", r.line("scenario", key)) from None
        elif key in ("delta_t", "n_pulses"):
            train[key] = r.number("scenario", key, value, int if key == "n_pulses" else float)
        elif key == "delay_slots":
            values[key] = r.number("scenario", key, value, int)
        elif key == "pump_phase":
            if "theta" in sc:
                raise ConfigError("give either theta or pump_phase, not both", r.line("scenario", key))
            values["theta"] = theta_from_pump_phase(r.number("scenario", key, value))
        else:
            values[key] = r.number("scenario", key, value)
    if "k1" not in values or "k2" not in values:
        raise ConfigError("scenario needs a preset or both k1 and k2", r.line("scenario"))
    values.pop("pulse_train", None)
    try:
        spec = InterferometerSpec(**values, pulse_train=PulseTrainSpec(**train))
    except (ConfigError, ValueError) as exc:
        raise ConfigError(str(exc), r.line("scenario")) from None

    kc = r.section("kernel")
    kernel_kwargs = {}
    for key, value in kc.items():
        kernel_kwargs[key] = value if key == "shape" else r.number("kernel", key, value)
    shape = kernel_kwargs.get("shape", "square")
    if shape not in ("square", "single_pole"):
        raise ConfigError(f"kernel.shape must be 'square' or 'single_pole', got {shape!r}", r.line("kernel", "shape"))
    if shape == "single_pole":
        if "f_3db" not in kernel_kwargs:
            raise ConfigError("single_pole kernel needs f_3db", r.line("kernel"))
        if "t_r" in kernel_kwargs or "t_r_slots" in kernel_kwargs:
            raise ConfigError("single_pole kernel takes f_3db, not t_r", r.line("kernel"))
        kernel_kwargs.setdefault("t_r_slots", None)
    elif "f_3db" in kernel_kwargs:
        raise ConfigError("f_3db applies only to single_pole kernels", r.line("kernel", "f_3db"))
    if "t_r" in kernel_kwargs and "t_r_slots" in kernel_kwargs:
        raise ConfigError("give either t_r or t_r_slots, not both", r.line("kernel"))
    if "t_r" in kernel_kwargs:
        kernel_kwargs["t_r_slots"] = None
    kernel = KernelConfig(**kernel_kwargs)
    try:
        kernel.make(spec.pulse_train.delta_t)
    except ConfigError as exc:
        raise ConfigError(str(exc), r.line("kernel")) from None

    scan = None
    if "scan" in data:
        s = r.section("scan")
        kwargs = {}
        for key, value in s.items():
            if key == "variable":
                if value not in SCAN_VARIABLES:
                    raise ConfigError(
                        f"scan.variable must be one of {', '.join(SCAN_VARIABLES)}, got {value!r}",
                        r.line("scan", key),
                    )
                kwargs[key] = value
            elif key == "endpoint":
                if not isinstance(value, bool):
                    raise ConfigError("scan.endpoint must be true or false", r.line("scan", key))
                kwargs[key] = value
            else:
                kwargs[key] = r.number("scan", key, value, int if key == "points" else float)
        scan = ScanConfig(**kwargs)
        if scan.points < 2:
            raise ConfigError(f"scan.points must be >= 2, got {scan.points}", r.line("scan", "points"))

    engine = data.get("engine", "analytic")
    if engine not in ENGINES:
        raise ConfigError(f"engine must be one of {', '.join(ENGINES)}, got {engine!r}", r.line("engine"))

    sampler = None
    if "sampler" in data:
        s = r.section("sampler")
        kwargs = {k: r.number("sampler", k, v, int) for k, v in s.items()}
        try:
            sampler = SamplerConfig(**kwargs)
        except ConfigError as exc:
            raise ConfigError(str(exc), r.line("sampler")) from None

    lo_phase = r.number("lo_phase", "lo_phase", data["lo_phase"]) if "lo_phase" in data else 0.0
    output = data.get("output", "su11sim-out")
    if not isinstance(output, str):
        raise ConfigError("output must be a path string", r.line("output"))

    jsf = JsfConfig()
    if "jsf" in data:
        j = r.section("jsf")
        kwargs = {}
        for key, value in j.items():
            if key == "csv":
                if not isinstance(value, str):
                    raise ConfigError("jsf.csv must be a path string", r.line("jsf", key))
                kwargs[key] = value
            else:
                kwargs[key] = r.number("jsf", key, value, int if key in ("grid_points", "n_modes") else float)
        jsf = JsfConfig(**kwargs)

    return RunConfig(
        spec=spec,
        kernel=kernel,
        scan=scan,
        engine=engine,
        sampler=sampler,
        lo_phase=lo_phase,
        output=output,
        jsf=jsf,
        scenario_name=name or "custom",
    )


def finalize(cfg: RunConfig, engine: Optional[str] = None, seed: Optional[int] = None,
             output: Optional[str] = None) -> RunConfig:
    """Apply command-line overrides and check cross-field constraints."""
    changes: dict[str, Any] = {}
    if engine is not None:
        if engine not in ENGINES:
            raise ConfigError(f"engine must be one of {', '.join(ENGINES)}, got {engine!r}")
        changes["engine"] = engine
    if seed is not None:
        base = cfg.sampler or SamplerConfig()
        changes["sampler"] = dataclasses.replace(base, seed=seed)
    if output is not None:
        changes["output"] = output
    cfg = dataclasses.replace(cfg, **changes)
    if cfg.uses_montecarlo and cfg.sampler is None:
        raise ConfigError("engine=montecarlo requires a sampler section (or --seed)")
    return cfg


def load(path, preset_override: Optional[str] = None, default_preset: Optional[str] = None) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    data, lines = load_text(text)
    return parse(data, lines, preset_override, default_preset)
