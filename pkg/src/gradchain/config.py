"""Validated trap configuration: species, chain size, trap frequency, field profile.

Configs are JSON documents. Quantity-valued entries accept either a string
with units ("100kHz") or a bare number interpreted as SI. Unknown keys are
rejected outright: a silently ignored typo in a physics config produces
plausible-looking wrong numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .constants import CONSTANTS, Species, get_species
from .units import FREQUENCY, QuantityError, parse_quantity

MAX_IONS = 50


class ConfigError(ValueError):
    """Base class for configuration validation failures."""


class MissingFieldError(ConfigError):
    def __init__(self, path: str):
        super().__init__(f"missing required field: {path}")
        self.path = path


class OutOfRangeError(ConfigError):
    def __init__(self, path: str, detail: str):
        super().__init__(f"field {path}: {detail}")
        self.path = path


class UnknownKeyError(ConfigError):
    def __init__(self, path: str, allowed):
        super().__init__(f"unknown key: {path} (allowed: {', '.join(sorted(allowed))})")
        self.path = path


class OutOfProfileRangeError(ValueError):
    """Position falls outside a sampled field profile's support."""

    def __init__(self, z: float, lo: float, hi: float):
        super().__init__(
            f"position z={z:.6g} m outside sampled profile range [{lo:.6g}, {hi:.6g}] m"
        )
        self.z = z


@dataclass(frozen=True)
class UniformGradientField:
    """B(z) = B0 + b z along the trap axis."""

    b0: float  # T
    b: float   # T/m

    def field_at(self, z: float) -> float:
        return self.b0 + self.b * z

    def gradient_at(self, z: float) -> float:
        return self.b

    def to_raw(self) -> dict:
        return {"uniform": {"B0": self.b0, "b": self.b}}


@dataclass(frozen=True)
class QuadraticField:
    """B(z) = B0 + b z + c z^2."""

    b0: float  # T
    b: float   # T/m
    c: float   # T/m^2

    def field_at(self, z: float) -> float:
        return self.b0 + (self.b + self.c * z) * z

    def gradient_at(self, z: float) -> float:
        return self.b + 2.0 * self.c * z

    def to_raw(self) -> dict:
        return {"quadratic": {"B0": self.b0, "b": self.b, "c": self.c}}


@dataclass(frozen=True)
class SampledField:
    """Piecewise-linear B(z) through sample points strictly increasing in z.

    The gradient at a point is the slope of the containing segment; a
    position exactly on an interior sample uses the right-hand segment.
    """

    points: tuple[tuple[float, float], ...]  # (z m, B T)

    def __post_init__(self):
        if len(self.points) < 2:
            raise OutOfRangeError("field.sampled.points", "need at least 2 points")
        zs = [z for z, _ in self.points]
        if any(b <= a for a, b in zip(zs, zs[1:])):
            raise OutOfRangeError("field.sampled.points", "z values must be strictly increasing")

    def _segment(self, z: float) -> int:
        zs = [p[0] for p in self.points]
        if z < zs[0] or z > zs[-1]:
            raise OutOfProfileRangeError(z, zs[0], zs[-1])
        # right-hand segment on ties; the last point belongs to the final segment
        for i in range(len(zs) - 1):
            if zs[i] <= z < zs[i + 1]:
                return i
        return len(zs) - 2

    def field_at(self, z: float) -> float:
        i = self._segment(z)
        (z0, b0), (z1, b1) = self.points[i], self.points[i + 1]
        return b0 + (b1 - b0) * (z - z0) / (z1 - z0)

    def gradient_at(self, z: float) -> float:
        i = self._segment(z)
        (z0, b0), (z1, b1) = self.points[i], self.points[i + 1]
        return (b1 - b0) / (z1 - z0)

    def to_raw(self) -> dict:
        return {"sampled": {"points": [[z, b] for z, b in self.points]}}


FieldProfile = UniformGradientField | QuadraticField | SampledField


FROM_TRANSITION = "from_transition"


@dataclass(frozen=True)
class TrapConfig:
    """Single source of physical truth for one simulated trap.

    axial_frequency_hz is the ordinary trap frequency as configured; all
    internal computations use the angular value, exposed as nu1.
    """

    species: Species
    ion_count: int
    axial_frequency_hz: float
    field: FieldProfile
    drive_wavevector: float | None = None  # rad/m; None = derive from transition

    @property
    def nu1(self) -> float:
        """Axial trap frequency in rad/s."""
        return 2.0 * math.pi * self.axial_frequency_hz

    @property
    def mass(self) -> float:
        return self.species.mass

    def wavevector(self) -> float:
        """Drive wavevector k in rad/m (omega0/c unless set explicitly)."""
        if self.drive_wavevector is not None:
            return self.drive_wavevector
        return self.species.omega0 / CONSTANTS.speed_of_light

    def to_raw(self) -> dict:
        raw = {
            "species": self.species.name,
            "N": self.ion_count,
            "nu1": self.axial_frequency_hz,
            "field": self.field.to_raw(),
        }
        if self.drive_wavevector is not None:
            raw["drive_wavevector"] = {"explicit": self.drive_wavevector}
        return raw


def _quantity(raw, path: str, dimension: str) -> float:
    """Accept a number (SI) or a unit string of the required dimension."""
    if isinstance(raw, bool):
        raise OutOfRangeError(path, f"expected a quantity, got {raw!r}")
    if isinstance(raw, (int, float)):
        if not math.isfinite(raw):
            raise OutOfRangeError(path, f"value must be finite, got {raw!r}")
        return float(raw)
    if isinstance(raw, str):
        try:
            value, dim = parse_quantity(raw)
        except QuantityError as exc:
            raise OutOfRangeError(path, str(exc)) from exc
        if dim != dimension:
            raise OutOfRangeError(path, f"expected {dimension}, got {dim} ({raw!r})")
        return value
    raise OutOfRangeError(path, f"expected a quantity, got {type(raw).__name__}")


def _check_keys(doc: dict, allowed: set[str], prefix: str = "") -> None:
    for key in doc:
        if key not in allowed:
            raise UnknownKeyError(prefix + key, allowed)


def _parse_field(raw, path: str = "field") -> FieldProfile:
    if not isinstance(raw, dict) or len(raw) != 1:
        raise OutOfRangeError(path, "expected exactly one of: uniform, quadratic, sampled")
    (variant, body), = raw.items()
    if not isinstance(body, dict):
        raise OutOfRangeError(f"{path}.{variant}", "expected an object")
    if variant == "uniform":
        _check_keys(body, {"B0", "b"}, f"{path}.uniform.")
        if "b" not in body:
            raise MissingFieldError(f"{path}.uniform.b")
        return UniformGradientField(
            b0=_quantity(body.get("B0", 0.0), f"{path}.uniform.B0", "field"),
            b=_quantity(body["b"], f"{path}.uniform.b", "gradient"),
        )
    if variant == "quadratic":
        _check_keys(body, {"B0", "b", "c"}, f"{path}.quadratic.")
        for key in ("b", "c"):
            if key not in body:
                raise MissingFieldError(f"{path}.quadratic.{key}")
        c = body["c"]
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise OutOfRangeError(f"{path}.quadratic.c", "curvature must be a bare SI number (T/m^2)")
        return QuadraticField(
            b0=_quantity(body.get("B0", 0.0), f"{path}.quadratic.B0", "field"),
            b=_quantity(body["b"], f"{path}.quadratic.b", "gradient"),
            c=float(c),
        )
    if variant == "sampled":
        _check_keys(body, {"points"}, f"{path}.sampled.")
        if "points" not in body:
            raise MissingFieldError(f"{path}.sampled.points")
        pts = body["points"]
        if not isinstance(pts, list):
            raise OutOfRangeError(f"{path}.sampled.points", "expected a list of [z, B] pairs")
        parsed = []
        for i, pair in enumerate(pts):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise OutOfRangeError(f"{path}.sampled.points[{i}]", "expected a [z, B] pair")
            parsed.append((
                _quantity(pair[0], f"{path}.sampled.points[{i}].z", "length"),
                _quantity(pair[1], f"{path}.sampled.points[{i}].B", "field"),
            ))
        return SampledField(points=tuple(parsed))
    raise UnknownKeyError(f"{path}.{variant}", {"uniform", "quadratic", "sampled"})


def validate_config(raw: dict) -> TrapConfig:
    """Validate a parsed config document and build a TrapConfig.

    Deterministic and side-effect free. Defaults: B0 = 0 when omitted,
    drive wavevector derived from the qubit transition frequency.
    """
    if not isinstance(raw, dict):
        raise OutOfRangeError("<root>", "config document must be a JSON object")
    _check_keys(raw, {"species", "N", "nu1", "field", "drive_wavevector", "comment"})

    for key in ("species", "N", "nu1", "field"):
        if key not in raw:
            raise MissingFieldError(key)

    species = get_species(raw["species"]) if isinstance(raw["species"], str) else None
    if species is None:
        raise OutOfRangeError("species", "expected a species name string")

    n = raw["N"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise OutOfRangeError("N", f"ion count must be an integer, got {n!r}")
    if not 1 <= n <= MAX_IONS:
        raise OutOfRangeError("N", f"ion count must be in [1, {MAX_IONS}], got {n}")

    nu1_hz = _quantity(raw["nu1"], "nu1", FREQUENCY)
    if nu1_hz <= 0:
        raise OutOfRangeError("nu1", f"axial frequency must be positive, got {nu1_hz}")

    profile = _parse_field(raw["field"])

    k = None
    dw = raw.get("drive_wavevector", FROM_TRANSITION)
    if isinstance(dw, dict):
        _check_keys(dw, {"explicit"}, "drive_wavevector.")
        if "explicit" not in dw:
            raise MissingFieldError("drive_wavevector.explicit")
        kval = dw["explicit"]
        if not isinstance(kval, (int, float)) or isinstance(kval, bool) or kval <= 0:
            raise OutOfRangeError("drive_wavevector.explicit", "wavevector must be a positive number (rad/m)")
        k = float(kval)
    elif dw != FROM_TRANSITION:
        raise OutOfRangeError("drive_wavevector", f"expected {FROM_TRANSITION!r} or {{'explicit': k}}, got {dw!r}")

    return TrapConfig(
        species=species,
        ion_count=n,
        axial_frequency_hz=nu1_hz,
        field=profile,
        drive_wavevector=k,
    )


def load_config(path) -> TrapConfig:
    """Read and validate a config file."""
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return validate_config(raw)
