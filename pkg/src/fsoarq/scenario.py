"""Scenario files: INI-style sections describing one reproducible experiment.

Example::

    [channel]
    a = 4.3939
    b = 2.5636
    rf_model = rician
    nu = 0.0995
    omega = 0.7036

    [link]
    n_fso = 64
    rate = 2.0
    max_rounds = 1

    [power]
    mode = peak
    value = 10

    [engine]
    name = clt

    [output]
    path = c.csv
    sweep = rate
    start = 0.1
    stop = 6.0
    num = 60
    spacing = linear

Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .channels import GammaGammaParams, Rayleigh, RicianParams
from .exceptions import ConfigError, DomainError

__all__ = ["ScenarioFile", "load_scenario", "parse_scenario", "ENGINES", "SWEEP_VARIABLES"]

ENGINES = ("clt", "clt_exactq", "minkowski", "montecarlo", "all")
SWEEP_VARIABLES = ("power", "rate", "budget")

_SCHEMA = {
    "channel": {"a", "b", "rf_model", "nu", "omega"},
    "link": {"n_fso", "rate", "max_rounds"},
    "power": {"mode", "value", "rf_fso_split"},
    "engine": {"name", "trials", "seed", "batch_count", "max_n", "simplified_slope", "grid_resolution"},
    "output": {"path", "sweep", "values", "start", "stop", "num", "spacing"},
}
_REQUIRED = {"channel": {"a", "b", "rf_model"}, "link": {"n_fso", "rate"}, "output": {"sweep"}}


@dataclass(frozen=True)
class ScenarioFile:
    gamma_gamma: GammaGammaParams
    rf: object
    n_fso: int
    rate: float
    max_rounds: int = 1
    power_mode: str = "peak"
    power_value: Optional[float] = None
    rf_fso_split: float = 0.5
    engine: str = "clt"
    trials: int = 100_000
    seed: int = 0
    batch_count: int = 32
    max_n: int = 5
    simplified_slope: bool = False
    grid_resolution: int = 60
    output_path: Optional[str] = None
    sweep: str = "power"
    grid: tuple = field(default=())

    def with_overrides(self, seed=None, engine=None):
        out = self
        if seed is not None:
            out = replace(out, seed=int(seed))
        if engine is not None:
            if engine not in ENGINES:
                raise ConfigError(f"--engine: unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
            out = replace(out, engine=engine)
        return out

    @property
    def rf_label(self):
        return "rayleigh" if isinstance(self.rf, Rayleigh) else "rician"


def _line_index(text):
    """Map (section, key) to the 1-based line where it is defined."""
    index = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            index.setdefault((section, None), lineno)
            continue
        m = re.match(r"^([A-Za-z0-9_\-\.]+)\s*[=:]", line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip().lower()), lineno)
    return index


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioFile:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    lines = _line_index(text)

    def where(section, key=None):
        ln = lines.get((section, key))
        loc = f"{source}:{ln}" if ln else source
        return f"{loc}: [{section}]" + (f" {key}" if key else "")

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{where(section)}: unknown section")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{where(section, key)}: unknown key")
    for section, keys in _REQUIRED.items():
        for key in keys:
            if not cp.has_option(section, key):
                raise ConfigError(f"{source}: [{section}] {key} is required")

    def get(section, key, conv, default=None):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"{where(section, key)}: invalid value {raw!r} ({exc})") from exc

    def boolean(raw):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError("expected a boolean")

    def choice(options):
        def conv(raw):
            val = raw.strip().lower()
            if val not in options:
                raise ValueError(f"expected one of {', '.join(options)}")
            return val
        return conv

    def positive(conv):
        def inner(raw):
            v = conv(raw)
            if not v > 0:
                raise ValueError("must be positive")
            return v
        return inner

    try:
        gg = GammaGammaParams(get("channel", "a", float), get("channel", "b", float))
    except DomainError as exc:
        raise ConfigError(f"{where('channel')}: {exc}") from exc
    rf_model = get("channel", "rf_model", choice(("rayleigh", "rician")))
    if rf_model == "rician":
        nu = get("channel", "nu", float)
        omega = get("channel", "omega", float)
        if nu is None or omega is None:
            raise ConfigError(f"{where('channel', 'rf_model')}: rician needs nu and omega")
        try:
            rf = RicianParams(nu, omega)
        except DomainError as exc:
            raise ConfigError(f"{where('channel')}: {exc}") from exc
    else:
        if cp.has_option("channel", "nu") or cp.has_option("channel", "omega"):
            raise ConfigError(f"{where('channel', 'rf_model')}: nu/omega only apply to rf_model = rician")
        rf = Rayleigh()

    n_fso = get("link", "n_fso", positive(int))
    rate = get("link", "rate", positive(float))
    max_rounds = get("link", "max_rounds", positive(int), 1)

    mode = get("power", "mode", choice(("peak", "expected_energy")), "peak")
    value = get("power", "value", positive(float))
    split = get("power", "rf_fso_split", float, 0.5)
    if not 0.0 <= split <= 1.0:
        raise ConfigError(f"{where('power', 'rf_fso_split')}: must lie in [0, 1]")

    engine = get("engine", "name", choice(ENGINES), "clt")
    trials = get("engine", "trials", positive(int), 100_000)
    seed = get("engine", "seed", int, 0)
    batch_count = get("engine", "batch_count", positive(int), 32)
    max_n = get("engine", "max_n", positive(int), 5)
    simplified_slope = get("engine", "simplified_slope", boolean, False)
    grid_resolution = get("engine", "grid_resolution", positive(int), 60)
    if trials % batch_count:
        raise ConfigError(f"{where('engine', 'batch_count')}: must divide trials ({trials})")

    sweep = get("output", "sweep", choice(SWEEP_VARIABLES))
    if sweep == "budget" and mode != "expected_energy":
        raise ConfigError(f"{where('output', 'sweep')}: budget sweeps need [power] mode = expected_energy")
    if sweep == "power" and mode != "peak":
        raise ConfigError(f"{where('output', 'sweep')}: power sweeps need [power] mode = peak")
    if sweep == "rate" and value is None:
        raise ConfigError(f"{where('power')}: value is required when sweeping the rate")

    if cp.has_option("output", "values"):
        if any(cp.has_option("output", k) for k in ("start", "stop", "num", "spacing")):
            raise ConfigError(f"{where('output', 'values')}: give either values or start/stop/num, not both")
        grid = get("output", "values", lambda raw: tuple(float(v) for v in raw.replace(",", " ").split()))
        if not grid:
            raise ConfigError(f"{where('output', 'values')}: empty grid")
    else:
        start = get("output", "start", positive(float))
        stop = get("output", "stop", positive(float))
        num = get("output", "num", positive(int), 1)
        spacing = get("output", "spacing", choice(("linear", "log")), "linear")
        if start is None:
            raise ConfigError(f"{where('output')}: give values or start/stop/num")
        if stop is None:
            stop = start
        space = np.geomspace if spacing == "log" else np.linspace
        grid = tuple(float(v) for v in space(start, stop, num))
    if any(not v > 0 for v in grid):
        raise ConfigError(f"{where('output')}: sweep values must be positive")

    return ScenarioFile(
        gamma_gamma=gg,
        rf=rf,
        n_fso=n_fso,
        rate=rate,
        max_rounds=max_rounds,
        power_mode=mode,
        power_value=value,
        rf_fso_split=split,
        engine=engine,
        trials=trials,
        seed=seed,
        batch_count=batch_count,
        max_n=max_n,
        simplified_slope=simplified_slope,
        grid_resolution=grid_resolution,
        output_path=get("output", "path", str),
        sweep=sweep,
        grid=tuple(sorted(grid)),
    )


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text, source=str(path))
