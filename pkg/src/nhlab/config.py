"""INI-style experiment configuration.

Example::

    [experiment]
    mode = real
    theta0_start = -45
    theta0_stop = 45
    theta0_step = 1
    theta1 = 22.5
    theta3 = 60
    theta5 = 22.5
    theta7 = 75

    [noise]
    enabled = true
    rate_scale = 1e4
    visibility_factor = 1.0
    seed = 7

    [fringe]
    arm_reflect = I
    arm_transmit = B
    theta0 = -45

    [entangle]
    channel_a = xy
    channel_b = xy
    state = singlet

    [channel.custom]
    kraus0 = 0.70710678,0 0,0 0,0 0.70710678,0
    kraus1 = 0.70710678,0 0,0 0,0 -0.70710678,0

Matrices are row-major lists of ``re,im`` pairs separated by whitespace.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import entanglement as ent
from . import optics
from .noise import EXTRACTIONS, CountingModel

REAL_DEFAULTS = {"theta1": 22.5, "theta3": 60.0, "theta5": 22.5, "theta7": 75.0}
COMPLEX_DEFAULTS = {"theta1": 22.5, "theta3": 60.0, "theta5": 0.0, "theta7": 75.0, "theta_a": 0.0, "theta_b": 0.0}
ARMS = ("I", "A", "B")
CHANNEL_PRESETS = {
    "identity": lambda: ent.identity_channel(2),
    "xy": ent.xy_channel,
}
STATE_PRESETS = {
    "singlet": ent.singlet,
    "product00": lambda: np.array([1, 0, 0, 0], dtype=complex),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    start: float = -45.0
    stop: float = 45.0
    step: float = 1.0

    def grid(self) -> np.ndarray:
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return np.round(self.start + self.step * np.arange(n), 12)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "real"
    sweep: SweepSpec = field(default_factory=SweepSpec)
    angles: dict = field(default_factory=lambda: dict(REAL_DEFAULTS))
    noise: CountingModel | None = None
    trials: int = 200
    extraction: str = "extrema"
    grid_points: int = 256
    fringe_arms: tuple[str, str] = ("I", "I")
    fringe_theta0: float = -45.0
    channel_a: ent.KrausChannel | None = None
    channel_b: ent.KrausChannel | None = None
    bipartite_state: np.ndarray | None = None
    out_dir: str = "out"

    def operator_pair(self) -> optics.OperatorPair:
        if self.mode == "real":
            return optics.real_pair(**self.angles)
        return optics.complex_pair(**self.angles)

    def with_mode(self, mode: str) -> "ExperimentConfig":
        if mode == self.mode:
            return self
        defaults = REAL_DEFAULTS if mode == "real" else COMPLEX_DEFAULTS
        return replace(self, mode=mode, angles=dict(defaults))


def _line_index(path: Path) -> dict[tuple[str, str], int]:
    lines = {}
    section = ""
    for no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            lines[(section, "")] = no
            continue
        m = re.match(r"^([^=:#;]+?)\s*[=:]", line)
        if m and section:
            lines[(section, m.group(1).strip().lower())] = no
    return lines


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, path: str, lines: dict):
        self.parser = parser
        self.path = path
        self.lines = lines

    def error(self, section: str, key: str, msg: str) -> ConfigError:
        no = self.lines.get((section, key), self.lines.get((section, ""), 0))
        return ConfigError(f"{self.path}:{no}: [{section}] {key}: {msg}")

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def get(self, section: str, key: str, default=None):
        if not self.has(section, key):
            return default
        return self.parser.get(section, key).strip()

    def float(self, section: str, key: str, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {raw!r}") from None

    def int(self, section: str, key: str, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        except ValueError:
            raise self.error(section, key, f"expected an integer, got {raw!r}") from None

    def bool(self, section: str, key: str, default=False):
        if not self.has(section, key):
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise self.error(section, key, "expected true/false") from None


def parse_complex_list(text: str) -> np.ndarray:
    values = []
    for tok in text.split():
        parts = tok.split(",")
        if len(parts) != 2:
            raise ValueError(f"bad complex pair {tok!r}; expected re,im")
        values.append(complex(float(parts[0]), float(parts[1])))
    return np.array(values, dtype=complex)


def parse_matrix(text: str) -> np.ndarray:
    flat = parse_complex_list(text)
    d = int(round(np.sqrt(flat.size)))
    if d * d != flat.size or d == 0:
        raise ValueError(f"{flat.size} entries do not form a square matrix")
    return flat.reshape(d, d)


def format_complex_list(values) -> str:
    return " ".join(f"{complex(v).real!r},{complex(v).imag!r}" for v in np.ravel(values))


def _channel(reader: _Reader, key: str, name: str | None) -> ent.KrausChannel | None:
    if name is None:
        return None
    if name in CHANNEL_PRESETS:
        return CHANNEL_PRESETS[name]()
    section = f"channel.{name}"
    if not reader.parser.has_section(section):
        raise reader.error("entangle", key, f"unknown channel {name!r}; define [{section}] or use {sorted(CHANNEL_PRESETS)}")
    kraus = []
    for opt in sorted(reader.parser.options(section), key=lambda s: (len(s), s)):
        try:
            kraus.append(parse_matrix(reader.get(section, opt)))
        except ValueError as exc:
            raise reader.error(section, opt, str(exc)) from None
    try:
        return ent.KrausChannel(tuple(kraus))
    except ValueError as exc:
        raise reader.error(section, "", str(exc)) from None


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    r = _Reader(parser, str(path), _line_index(path))
    sec = "experiment"

    mode = (r.get(sec, "mode", "real") or "real").lower()
    if mode not in ("real", "complex"):
        raise r.error(sec, "mode", f"expected real or complex, got {mode!r}")
    defaults = REAL_DEFAULTS if mode == "real" else COMPLEX_DEFAULTS
    angles = {}
    for key, value in defaults.items():
        angles[key] = r.float(sec, key, value)
    for key in ("theta_a", "theta_b"):
        if mode == "real" and r.has(sec, key):
            raise r.error(sec, key, "not allowed in real mode")
        if mode == "complex" and angles[key] != 0.0:
            raise r.error(sec, key, "only 0 deg is supported in v1")

    sweep = SweepSpec(
        r.float(sec, "theta0_start", -45.0),
        r.float(sec, "theta0_stop", 45.0),
        r.float(sec, "theta0_step", 1.0),
    )
    if not sweep.step > 0:
        raise r.error(sec, "theta0_step", "must be > 0")
    if sweep.start > sweep.stop:
        raise r.error(sec, "theta0_start", "must not exceed theta0_stop")

    noise = None
    if r.bool("noise", "enabled", False):
        try:
            noise = CountingModel(
                rate_scale=r.float("noise", "rate_scale", 1e4),
                visibility_factor=r.float("noise", "visibility_factor", 1.0),
                seed=r.int("noise", "seed", 0),
            )
        except ValueError as exc:
            raise r.error("noise", "", str(exc)) from None
    trials = r.int("noise", "trials", 200)
    extraction = r.get("noise", "extraction", "extrema")
    if extraction not in EXTRACTIONS:
        raise r.error("noise", "extraction", f"expected one of {EXTRACTIONS}")

    arms = (r.get("fringe", "arm_reflect", "I").upper(), r.get("fringe", "arm_transmit", "I").upper())
    for key, arm in zip(("arm_reflect", "arm_transmit"), arms):
        if arm not in ARMS:
            raise r.error("fringe", key, f"expected one of {ARMS}, got {arm!r}")
    grid_points = r.int("fringe", "grid_points", 256)

    ch_a = _channel(r, "channel_a", r.get("entangle", "channel_a"))
    ch_b = _channel(r, "channel_b", r.get("entangle", "channel_b"))
    state = None
    state_name = r.get("entangle", "state")
    if state_name is not None:
        if state_name in STATE_PRESETS:
            state = STATE_PRESETS[state_name]()
        else:
            try:
                state = parse_complex_list(state_name)
            except ValueError as exc:
                raise r.error("entangle", "state", str(exc)) from None

    return ExperimentConfig(
        mode=mode,
        sweep=sweep,
        angles=angles,
        noise=noise,
        trials=trials,
        extraction=extraction,
        grid_points=grid_points,
        fringe_arms=arms,
        fringe_theta0=r.float("fringe", "theta0", -45.0),
        channel_a=ch_a,
        channel_b=ch_b,
        bipartite_state=state,
        out_dir=r.get("outputs", "dir", "out"),
    )
