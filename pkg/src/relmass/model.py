"""
Physical parameters and regime checks.

All formulas in the package read their constants from a single
:class:`PhysicalParams` instance. Nothing assumes natural units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path


class InvalidParameterError(ValueError):
    """A physical parameter is outside its allowed range."""


class ConfigError(ValueError):
    """A parameter file could not be parsed.

    ``line`` is the 1-based line number of the offending entry, or ``None``
    when the problem is not tied to a single line (e.g. a missing key).
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


DEFAULT_THRESHOLD = 0.1


@dataclass(frozen=True)
class PhysicalParams:
    """Constants of the atom-in-a-well system.

    Parameters
    ----------
    hbar : float
        Reduced Planck constant.
    c : float
        Speed of light.
    m0 : float
        Non-dynamical part of the rest mass.
    well_length : float
        Width L of the infinite well.
    e1_int : float
        Energy of the excited internal level; the ground level is 0.
    """

    hbar: float
    c: float
    m0: float
    well_length: float
    e1_int: float

    def __post_init__(self):
        for name in ("hbar", "c", "m0", "well_length"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")
        if not math.isfinite(self.e1_int) or self.e1_int < 0:
            raise InvalidParameterError(f"e1_int must be non-negative and finite, got {self.e1_int!r}")

    @property
    def rest_energy(self) -> float:
        return self.m0 * self.c**2

    def replace(self, **changes) -> "PhysicalParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return PhysicalParams(**values)


CP1 = PhysicalParams(hbar=1.0, c=10.0, m0=1.0, well_length=1.0, e1_int=0.5)

PRESETS = {"cp1": CP1}


@dataclass(frozen=True)
class RegimeReport:
    internal_ratio: float
    momentum_ratio: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.warnings


def validate_params(p: PhysicalParams, n_max: int = 1, threshold: float = DEFAULT_THRESHOLD) -> RegimeReport:
    """Measure how far ``p`` sits from the weakly relativistic regime.

    ``internal_ratio`` is E1_int / (M0 c^2). ``momentum_ratio`` is
    <P^2> / (M0 c)^2 in the well level ``n_max`` (0-based), which equals
    2 E_nmax / (M0 c^2). A warning is attached for each ratio above
    ``threshold``; the report never raises for a regime violation.
    """
    if not isinstance(p, PhysicalParams):
        raise InvalidParameterError("expected a PhysicalParams instance")
    # PhysicalParams validates itself, but frozen instances can be built
    # with object.__setattr__ tricks; recheck cheaply.
    p.__post_init__()
    if int(n_max) != n_max or n_max < 1:
        raise InvalidParameterError(f"n_max must be an integer >= 1, got {n_max!r}")
    if not 0.0 < threshold < 1.0:
        raise InvalidParameterError(f"threshold must lie in (0, 1), got {threshold!r}")

    # Local import: spectrum depends on this module.
    from relmass.spectrum import well_energy

    internal_ratio = p.e1_int / p.rest_energy
    momentum_ratio = 2.0 * well_energy(p, int(n_max)) / p.rest_energy

    warnings = []
    if internal_ratio > threshold:
        warnings.append(
            f"internal_ratio {internal_ratio:.6g} exceeds {threshold:g}: H_int/M0c^2 is not small"
        )
    if momentum_ratio > threshold:
        warnings.append(
            f"momentum_ratio {momentum_ratio:.6g} exceeds {threshold:g}: P^2/(M0c)^2 is not small at N={int(n_max)}"
        )
    return RegimeReport(internal_ratio, momentum_ratio, tuple(warnings))


_CONFIG_KEYS = tuple(f.name for f in fields(PhysicalParams))


def parse_params(text: str) -> PhysicalParams:
    """Parse ``key = value`` lines into :class:`PhysicalParams`.

    Blank lines and ``#`` comments are ignored. Every key must appear
    exactly once; unknown keys are rejected.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r} (allowed: {', '.join(_CONFIG_KEYS)})", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = float(value)
        except ValueError:
            raise ConfigError(f"value for {key!r} is not a number: {value!r}", lineno) from None
        if not math.isfinite(values[key]):
            raise ConfigError(f"value for {key!r} is not finite", lineno)

    missing = [k for k in _CONFIG_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing key(s): {', '.join(missing)}")
    try:
        return PhysicalParams(**values)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from None


def load_params(path: str | Path) -> PhysicalParams:
    return parse_params(Path(path).read_text(encoding="utf-8"))
