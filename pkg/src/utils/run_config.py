"""Scenario configuration for a run.

Values resolve in three layers: built-in defaults (the standard simulation
parameter table), then a ``key = value`` config file, then command-line
flags. Dimensioned values must carry a unit suffix and are converted to SI
once, here. Beamwidth stays in degrees.
"""

import math
import re
from pathlib import Path
from typing import Callable, Dict, List, Literal, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from model.allocation import Scheme, SCHEME_ORDER
from model.errors import ConfigError
from model.geometry import NetworkGeometry
from model.limits import LimitForm
from model.link import LinkBudget, SnrModel
from model.montecarlo import VelocityErrorModel
from model.schemes import DEFAULT_SCHEMES
from model.units import Dbm, kmh_to_ms
from utils.config import settings
from utils.logger import get_logger, log_config_value

logger = get_logger(__name__)

Converter = Callable[[float], float]

LENGTH_UNITS: Dict[str, Converter] = {
    "m": lambda x: x,
    "cm": lambda x: x * 1e-2,
    "mm": lambda x: x * 1e-3,
    "km": lambda x: x * 1e3,
}
SPEED_UNITS: Dict[str, Converter] = {
    "m/s": lambda x: x,
    "km/h": kmh_to_ms,
}
FREQUENCY_UNITS: Dict[str, Converter] = {
    "Hz": lambda x: x,
    "kHz": lambda x: x * 1e3,
    "MHz": lambda x: x * 1e6,
    "GHz": lambda x: x * 1e9,
}
ANGLE_UNITS: Dict[str, Converter] = {
    "deg": lambda x: x,
    "rad": math.degrees,
}
DB_UNITS: Dict[str, Converter] = {"dB": lambda x: x}
DBM_UNITS: Dict[str, Converter] = {"dBm": lambda x: x}

# short names used in the simulation parameter table
KEY_ALIASES = {
    "B": "bandwidth",
    "W": "shadowing",
    "NF": "noise_figure",
    "n": "path_loss_exp",
    "N": "n_segments",
    "lambda": "wavelength",
    "P": "p_ref",
    "printed_limit": "eq40_as_printed",
}

SWEEP_UNITS: Dict[str, Optional[Dict[str, Converter]]] = {
    "dl": LENGTH_UNITS,
    "v": SPEED_UNITS,
    "n_segments": None,
}

_QUANTITY = re.compile(
    r"^\s*(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*(?P<unit>[A-Za-z/]*)\s*$"
)

TABLE1_SPEED = kmh_to_ms(300.0)


class SweepSpec(BaseModel):
    """``var:start:stop:step`` with an inclusive stop."""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    var: Literal["dl", "v", "n_segments"]
    start: float
    stop: float
    step: float = Field(gt=0)

    @model_validator(mode="after")
    def _non_empty(self) -> "SweepSpec":
        if self.stop < self.start:
            raise ValueError(f"sweep stop {self.stop} is below start {self.start}")
        if self.var == "n_segments" and any(
            x != int(x) or x < 1 for x in (self.start, self.stop, self.step)
        ):
            raise ValueError("n_segments sweeps need positive integer bounds and step")
        return self

    def values(self) -> List[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        points = [self.start + i * self.step for i in range(count)]
        if self.var == "n_segments":
            return [float(int(round(p))) for p in points]
        return points

    def to_text(self) -> str:
        unit = {"dl": " m", "v": " m/s", "n_segments": ""}[self.var]
        bounds = [self.start, self.stop, self.step]
        if self.var == "n_segments":
            return ":".join([self.var] + [str(int(b)) for b in bounds])
        return ":".join([self.var] + [f"{b!r}{unit}" for b in bounds])


class RunConfig(BaseModel):
    """Every input of a run, in SI units (beamwidth in degrees)."""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    d0: float = Field(default=20.0, gt=0)
    dl: float = Field(default=120.0, gt=0)
    v: float = Field(default=TABLE1_SPEED, gt=0)
    n_segments: int = Field(default=8, ge=1)
    theta_3db: float = Field(default=30.0, gt=0, le=180)
    shadowing: float = Field(default=10.0, ge=0)
    path_loss_exp: float = Field(default=2.0, gt=0)
    wavelength: float = Field(default=0.005, gt=0)
    bandwidth: float = Field(default=2.16e9, gt=0)
    noise_figure: float = Field(default=6.0, ge=0)
    mode: SnrModel = SnrModel.PAPER_LITERAL
    p_ref: Tuple[Dbm, ...] = Field(default=(Dbm(40.0), Dbm(50.0)), min_length=1)
    schemes: Tuple[Scheme, ...] = Field(default=DEFAULT_SCHEMES, min_length=1)
    sweep: Optional[SweepSpec] = None
    sigma_v: float = Field(default=0.0, ge=0)
    sigma_v_fraction: Optional[float] = Field(default=None, ge=0)
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    out: Optional[str] = None
    eq40_as_printed: bool = False
    limit_form: LimitForm = LimitForm.EXACT
    workers: int = Field(default=settings.workers, ge=1)

    def link_budget(self) -> LinkBudget:
        return LinkBudget.from_parameters(
            theta_3db=self.theta_3db,
            shadowing=self.shadowing,
            path_loss_exp=self.path_loss_exp,
            wavelength=self.wavelength,
            bandwidth=self.bandwidth,
            noise_figure=self.noise_figure,
        )

    def geometry(self) -> NetworkGeometry:
        return self.geometry_at("dl", self.dl)

    def sweep_points(self) -> List[Tuple[str, float]]:
        """(sweep variable, value) per point; a run without a sweep is one dl point."""
        if self.sweep is None:
            return [("dl", self.dl)]
        return [(self.sweep.var, value) for value in self.sweep.values()]

    def geometry_at(self, var: str, value: float) -> NetworkGeometry:
        """Geometry of one sweep point.

        Raises:
            DomainError: If the swept value is outside the model's domain (a zero cell length).
        """
        if var == "dl":
            return NetworkGeometry(d0=self.d0, dl=value, n_segments=self.n_segments, v=self.v)
        if var == "v":
            return NetworkGeometry(d0=self.d0, dl=self.dl, n_segments=self.n_segments, v=value)
        return NetworkGeometry(d0=self.d0, dl=self.dl, n_segments=int(value), v=self.v)

    def sigma_for(self, v: float) -> float:
        if self.sigma_v_fraction is not None:
            return self.sigma_v_fraction * v
        return self.sigma_v

    def velocity_model(self, v: float) -> VelocityErrorModel:
        return VelocityErrorModel(sigma_v=self.sigma_for(v), seed=self.seed, trials=self.trials)

    def to_config_entries(self) -> Dict[str, str]:
        """Config-file text per key, with units; keys left at None are omitted."""
        entries = {
            "d0": f"{self.d0!r} m",
            "dl": f"{self.dl!r} m",
            "v": f"{self.v!r} m/s",
            "n_segments": str(self.n_segments),
            "theta_3db": f"{self.theta_3db!r} deg",
            "shadowing": f"{self.shadowing!r} dB",
            "path_loss_exp": repr(self.path_loss_exp),
            "wavelength": f"{self.wavelength!r} m",
            "bandwidth": f"{self.bandwidth!r} Hz",
            "noise_figure": f"{self.noise_figure!r} dB",
            "mode": self.mode.value,
            "p_ref": ", ".join(f"{p!r} dBm" for p in self.p_ref),
            "schemes": ", ".join(s.value for s in self.schemes),
        }
        if self.sweep is not None:
            entries["sweep"] = self.sweep.to_text()
        if self.sigma_v_fraction is not None:
            entries["sigma_v"] = f"{self.sigma_v_fraction!r} v"
        else:
            entries["sigma_v"] = f"{self.sigma_v!r} m/s"
        entries["trials"] = str(self.trials)
        entries["seed"] = str(self.seed)
        if self.out is not None:
            entries["out"] = self.out
        entries["eq40_as_printed"] = "true" if self.eq40_as_printed else "false"
        entries["limit_form"] = self.limit_form.value
        entries["workers"] = str(self.workers)
        return entries

    def to_config_text(self) -> str:
        """Canonical config file text; parsing it gives back an identical RunConfig."""
        return "".join(f"{key} = {text}\n" for key, text in self.to_config_entries().items())


def parse_quantity(key: str, text: str, units: Mapping[str, Converter]) -> float:
    """Parse ``"<number> <unit>"`` and convert it with the converter for that unit."""
    match = _QUANTITY.match(text)
    expected = ", ".join(units)
    if not match:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number with a unit ({expected})", key=key)
    unit = match.group("unit")
    if not unit:
        raise ConfigError(f"{key}: missing unit in {text!r}, expected one of {expected}", key=key)
    converter = {name.lower(): c for name, c in units.items()}.get(unit.lower())
    if converter is None:
        raise ConfigError(f"{key}: unknown unit {unit!r}, expected one of {expected}", key=key)
    return float(converter(float(match.group("number"))))


def _parse_plain_number(key: str, text: str) -> float:
    match = _QUANTITY.match(text)
    if not match or match.group("unit"):
        raise ConfigError(f"{key}: expected a plain number, got {text!r}", key=key)
    return float(match.group("number"))


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}", key=key)


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {text!r}", key=key)


def _parse_enum(key: str, text: str, enum_type):
    value = text.strip()
    for member in enum_type:
        if member.value.lower() == value.lower():
            return member
    choices = ", ".join(m.value for m in enum_type)
    raise ConfigError(f"{key}: expected one of {choices}, got {text!r}", key=key)


def _parse_schemes(key: str, text: str) -> Tuple[Scheme, ...]:
    if text.strip().lower() == "all":
        return SCHEME_ORDER
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise ConfigError(f"{key}: at least one scheme is required", key=key)
    chosen = {_parse_enum(key, name, Scheme) for name in names}
    return tuple(s for s in SCHEME_ORDER if s in chosen)


def _parse_p_ref(key: str, text: str) -> Tuple[Dbm, ...]:
    parts = [part for part in text.split(",") if part.strip()]
    if not parts:
        raise ConfigError(f"{key}: at least one reference power is required", key=key)
    return tuple(Dbm(parse_quantity(key, part, DBM_UNITS)) for part in parts)


def parse_sweep(key: str, text: str) -> SweepSpec:
    fields = text.strip().split(":")
    if len(fields) != 4:
        raise ConfigError(f"{key}: expected var:start:stop:step, got {text!r}", key=key)
    var = fields[0].strip()
    if var not in SWEEP_UNITS:
        raise ConfigError(f"{key}: sweep variable must be one of dl, v, n_segments, got {var!r}", key=key)
    units = SWEEP_UNITS[var]
    if units is None:
        bounds = [float(_parse_int(key, f)) for f in fields[1:]]
    else:
        bounds = [parse_quantity(key, f, units) for f in fields[1:]]
    try:
        return SweepSpec(var=var, start=bounds[0], stop=bounds[1], step=bounds[2])
    except ValidationError as e:
        raise ConfigError(f"{key}: {e.errors()[0]['msg']}", key=key)


def _parse_sigma(key: str, text: str) -> Tuple[str, float]:
    match = _QUANTITY.match(text)
    if match and match.group("unit") == "v":
        return "sigma_v_fraction", float(match.group("number"))
    return "sigma_v", parse_quantity(key, text, SPEED_UNITS)


PARSERS: Dict[str, Callable[[str, str], object]] = {
    "d0": lambda k, t: parse_quantity(k, t, LENGTH_UNITS),
    "dl": lambda k, t: parse_quantity(k, t, LENGTH_UNITS),
    "v": lambda k, t: parse_quantity(k, t, SPEED_UNITS),
    "n_segments": _parse_int,
    "theta_3db": lambda k, t: parse_quantity(k, t, ANGLE_UNITS),
    "shadowing": lambda k, t: parse_quantity(k, t, DB_UNITS),
    "path_loss_exp": _parse_plain_number,
    "wavelength": lambda k, t: parse_quantity(k, t, LENGTH_UNITS),
    "bandwidth": lambda k, t: parse_quantity(k, t, FREQUENCY_UNITS),
    "noise_figure": lambda k, t: parse_quantity(k, t, DB_UNITS),
    "mode": lambda k, t: _parse_enum(k, t, SnrModel),
    "p_ref": _parse_p_ref,
    "schemes": _parse_schemes,
    "sweep": parse_sweep,
    "sigma_v": _parse_sigma,
    "trials": _parse_int,
    "seed": _parse_int,
    "out": lambda k, t: t.strip(),
    "eq40_as_printed": _parse_bool,
    "limit_form": lambda k, t: _parse_enum(k, t, LimitForm),
    "workers": _parse_int,
}


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Raw ``key = value`` pairs; '#' starts a comment."""
    entries: Dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = KEY_ALIASES.get(key, key.replace("-", "_"))
        if key not in PARSERS:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}", key=key)
        if key in entries:
            raise ConfigError(f"{path}:{number}: duplicate key {key!r}", key=key)
        entries[key] = value
    return entries


def _resolve(layer: Mapping[str, Optional[str]], provenance: str) -> Dict[str, Tuple[object, str]]:
    resolved: Dict[str, Tuple[object, str]] = {}
    for key, text in layer.items():
        if text is None:
            continue
        if key not in PARSERS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        value = PARSERS[key](key, text)
        if key == "sigma_v":
            field_name, number = value
            resolved["sigma_v"] = (number if field_name == "sigma_v" else 0.0, provenance)
            resolved["sigma_v_fraction"] = (number if field_name == "sigma_v_fraction" else None, provenance)
        else:
            resolved[key] = (value, provenance)
    return resolved


def parse_config(
    path: Optional[Union[str, Path]] = None,
    flags: Optional[Mapping[str, Optional[str]]] = None,
) -> RunConfig:
    """Build a RunConfig from defaults, an optional config file and flag strings.

    Args:
        path: Config file, or None for defaults only.
        flags: Raw flag values keyed by config key; None entries are unset.

    Returns:
        The validated RunConfig. Every field is logged with the layer it came from.

    Raises:
        ConfigError: On unknown keys, missing or wrong units, or invalid values.
    """
    values: Dict[str, Tuple[object, str]] = {}
    if path is not None:
        values.update(_resolve(read_config_file(path), "file"))
    if flags:
        values.update(_resolve(flags, "flag"))

    try:
        config = RunConfig(**{key: value for key, (value, _) in values.items()})
    except ValidationError as e:
        first = e.errors()[0]
        key = str(first["loc"][0]) if first["loc"] else ""
        raise ConfigError(f"{key}: {first['msg']}", key=key)

    echo = config.to_config_entries()
    for key in RunConfig.model_fields:
        provenance = values.get(key, (None, "default"))[1]
        log_config_value(logger, key, echo.get(key, getattr(config, key)), provenance)
    logger.info(
        "Resolved configuration",
        extra={"config_text": config.to_config_text(), "numerics": settings.get_numerics_config()},
    )
    return config
