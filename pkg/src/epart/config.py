"""Flat ``section.key = value`` run configuration.

One assignment per line; ``#`` starts a comment. Lists are
comma-separated. ``inf`` is accepted wherever a float is. Example::

    model.family = spinless-fermion-ring
    model.M = 4
    model.N = 2
    ensemble.type = ground
    partition.A = 0, 1
    partition.B = 2, 3
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .fock import BipartitionSpec, FockError
from .models import FAMILIES, ModelError, ModelSpec
from .thermal import ThermalError, ThermalSpec


class ConfigError(ValueError):
    pass


def _float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("nan is not allowed")
    return value


def _int(text: str) -> int:
    return int(text)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _list(item: Callable[[str], Any]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty list")
        return [item(p) for p in parts]

    return parse


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


@dataclass(frozen=True)
class Param:
    parse: Callable[[str], Any]
    default: Any = None
    help: str = ""


FLOAT, INT, BOOL, STR = Param(_float), Param(_int), Param(_bool), Param(str)
FLOATS, INTS = _list(_float), _list(_int)

MODEL_KEYS = {
    "model.family": Param(_choice(*FAMILIES)),
    "model.M": Param(_int),
    "model.t": Param(_float, 1.0),
    "model.U": Param(_float, 0.0),
    "model.N": Param(_int),
    "model.periodic": Param(_bool, True),
}
ENSEMBLE_KEYS = {
    "ensemble.type": Param(_choice("ground", "canonical", "grand-canonical"), "ground"),
    "ensemble.T": Param(_float, 0.0),
    "ensemble.mu": Param(_float),
}
PARTITION_KEYS = {"partition.A": Param(INTS), "partition.B": Param(INTS)}
SWEEP_KEYS = {
    "sweep.axis": Param(str),
    "sweep.start": Param(_float),
    "sweep.stop": Param(_float),
    "sweep.points": Param(_int),
    "sweep.spacing": Param(_choice("linear", "log"), "linear"),
}
OUTPUT_KEYS = {"output.prefix": Param(str)}
COMMON_KEYS = {**SWEEP_KEYS, **OUTPUT_KEYS}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("sweep bounds must be finite")
        if self.points < 2:
            raise ConfigError("sweep.points must be at least 2")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log spacing needs positive sweep bounds")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    values: dict
    echo: tuple[tuple[str, str], ...] = ()
    model: ModelSpec | None = None
    ensemble: ThermalSpec | None = None
    partition: BipartitionSpec | None = None
    sweep: SweepSpec | None = None
    output_prefix: str | None = None
    extra: dict = field(default_factory=dict)

    def get(self, key: str):
        return self.values[key]


def parse_lines(text: str, schema: dict[str, Param]) -> tuple[dict, tuple]:
    """Parse assignments against ``schema``; errors name the line and key."""
    found: dict[str, Any] = {}
    echo = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in schema:
            hint = [k for k in schema if k.lower() == key.lower()] or \
                difflib.get_close_matches(key, schema, n=1)
            extra = f" (did you mean '{hint[0]}'?)" if hint else ""
            raise ConfigError(f"line {lineno}: unknown key '{key}'{extra}")
        if key in found:
            raise ConfigError(f"line {lineno}: key '{key}' given twice")
        try:
            found[key] = schema[key].parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {exc}") from None
        echo.append((key, value))
    values = {k: p.default for k, p in schema.items()}
    values.update(found)
    return values, tuple(echo)


def build_run_config(text: str, schema: dict[str, Param], needs_model: bool = False) -> RunConfig:
    values, echo = parse_lines(text, schema)
    model = ensemble = partition = sweep = None
    try:
        if needs_model:
            for key in ("model.family", "model.M"):
                if values[key] is None:
                    raise ConfigError(f"missing required key '{key}'")
            model = ModelSpec(values["model.family"], values["model.M"], values["model.t"],
                              values["model.U"], values["model.N"], values["model.periodic"])
            ensemble = ThermalSpec(values["ensemble.type"], values["ensemble.T"], values["ensemble.mu"])
            if values["partition.A"] is None or values["partition.B"] is None:
                raise ConfigError("missing required keys 'partition.A' and 'partition.B'")
            partition = BipartitionSpec(tuple(values["partition.A"]), tuple(values["partition.B"]))
            modes = model.M * (2 if model.family in ("hubbard-dimer", "spinful-fermion-lattice") else 1)
            partition.validate(modes)
        if values.get("sweep.axis") is not None:
            missing = [k for k in ("sweep.start", "sweep.stop", "sweep.points") if values[k] is None]
            if missing:
                raise ConfigError(f"sweep needs {', '.join(missing)}")
            sweep = SweepSpec(values["sweep.axis"], values["sweep.start"], values["sweep.stop"],
                              values["sweep.points"], values["sweep.spacing"])
    except (ModelError, ThermalError, FockError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(values, echo, model, ensemble, partition, sweep, values.get("output.prefix"))
