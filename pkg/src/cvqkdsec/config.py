"""Declarative run configuration: INI-style sections with CLI overrides.

A config document holds up to six sections (constellation, channel,
measurement, security, sim, output); every physical quantity is in
shot-noise units and must be spelled with its explicit field name.
Override strings of the form ``section.key=value`` take precedence over
the file. Validation errors always name the offending field, e.g.
``constellation.N``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .bounds import ChannelModel
from .constellation import ConstellationSpec
from .covariance import MeasurementSpec


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class SecuritySection:
    eps_s: float
    eps_h: float
    beta: float | None
    eps_a: float | None
    n: float | None
    n_sweep: tuple | None  # (n_min, n_max, points)


@dataclass(frozen=True)
class SimSection:
    n_rounds: int
    seed: int
    modulation: str
    clip_mode: str
    backend: str
    entropy_bias_correction: bool


@dataclass(frozen=True)
class OutputSection:
    format: str
    path: str | None


class RunConfig:
    """Typed access to the section/key document."""

    def __init__(self, raw: dict):
        self.raw = raw

    def _get(self, section, key, conv, required=True, default=None):
        field = f"{section}.{key}"
        value = self.raw.get(section, {}).get(key)
        if value is None:
            if required:
                raise ConfigError(field, "required field is missing")
            return default
        try:
            return conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(field, f"invalid value {value!r} ({exc})") from None

    def constellation(self) -> ConstellationSpec:
        try:
            return ConstellationSpec(
                N=self._get("constellation", "N", float),
                R_A=self._get("constellation", "R_A", float),
                b=self._get("constellation", "b", _to_int),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("constellation", str(exc)) from None

    def channel(self) -> ChannelModel:
        eta = self._get("channel", "eta", float)
        u = self._get("channel", "u", float, required=False)
        omega = self._get("channel", "omega", float, required=False)
        if (u is None) == (omega is None):
            raise ConfigError("channel.u", "give exactly one of channel.u or channel.omega")
        try:
            if omega is not None:
                return ChannelModel(eta=eta, omega=omega)
            return ChannelModel.from_excess_noise(eta, u)
        except ValueError as exc:
            raise ConfigError("channel", str(exc)) from None

    def measurement(self) -> MeasurementSpec:
        m = self._get("measurement", "M", float)
        r_b = self._get("measurement", "R_B", float, required=False, default=m)
        try:
            return MeasurementSpec(M=m, R_B=r_b, b_B=self._get("measurement", "b_B", _to_int))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("measurement", str(exc)) from None

    def security(self) -> SecuritySection:
        sweep = self._get("security", "n_sweep", _parse_sweep, required=False)
        return SecuritySection(
            eps_s=self._get("security", "eps_s", float),
            eps_h=self._get("security", "eps_h", float),
            beta=self._get("security", "beta", float, required=False),
            eps_a=self._get("security", "eps_a", float, required=False),
            n=self._get("security", "n", float, required=False),
            n_sweep=sweep,
        )

    def sim(self) -> SimSection:
        return SimSection(
            n_rounds=self._get("sim", "n_rounds", _to_int),
            seed=self._get("sim", "seed", _to_int),
            modulation=self._get("sim", "modulation", str, required=False, default="grid"),
            clip_mode=self._get("sim", "clip_mode", str, required=False, default="clip"),
            backend=self._get("sim", "backend", str, required=False, default="auto"),
            entropy_bias_correction=self._get("sim", "entropy_bias_correction", _to_bool,
                                              required=False, default=False),
        )

    def output(self) -> OutputSection:
        fmt = self._get("output", "format", str, required=False, default="csv")
        if fmt not in ("csv", "json"):
            raise ConfigError("output.format", f"expected csv or json, got {fmt!r}")
        return OutputSection(format=fmt, path=self._get("output", "path", str, required=False))


def _to_bool(text) -> bool:
    v = str(text).strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _to_int(text) -> int:
    # accept "1e7"-style block sizes as long as they are exact integers
    v = float(text)
    i = int(v)
    if i != v:
        raise ValueError(f"{text!r} is not an integer")
    return i


def _parse_sweep(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("expected n_min:n_max:points")
    n_min, n_max, points = float(parts[0]), float(parts[1]), int(parts[2])
    if not (n_min >= 1 and n_max > n_min and points >= 2):
        raise ValueError("need 1 <= n_min < n_max and points >= 2")
    return n_min, n_max, points


def load_config(path: str | None, overrides=()) -> RunConfig:
    """Read the INI document (optional) and apply section.key=value overrides."""
    raw: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keys like R_A and N are case-sensitive
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path!r}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError("config", f"parse error in {path!r}: {exc}") from None
        raw = {s: dict(parser.items(s)) for s in parser.sections()}
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError("override", f"expected section.key=value, got {item!r}")
        key, value = item.split("=", 1)
        section, field = key.split(".", 1)
        raw.setdefault(section, {})[field] = value
    return RunConfig(raw)
