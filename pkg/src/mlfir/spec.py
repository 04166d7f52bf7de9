"""Linear-phase FIR filter specifications.

A specification is a list of frequency bands with piecewise-constant lower and
upper bounds on the zero-phase response, together with the filter order, the
symmetry type, the effective coefficient word length and the gain mode.

Coefficient vectors are indexed by ``m`` as in the zero-phase sum
``H_R(w) = sum_m h_m c_m(w)``; for type I filters ``m = 0`` is the center tap.
The printed convention (center tap last) is handled by
:func:`from_printed_order` / :func:`to_printed_order`.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import SpecError

MAX_WORDLENGTH = 24


class FilterType(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"

    @classmethod
    def parse(cls, value) -> "FilterType":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise SpecError(f"unknown filter type {value!r}") from None

    @property
    def symmetric(self) -> bool:
        return self in (FilterType.I, FilterType.II)

    def order_is_valid(self, order: int) -> bool:
        even = order % 2 == 0
        return even if self in (FilterType.I, FilterType.III) else not even

    def num_coefficients(self, order: int) -> int:
        if self is FilterType.I:
            return order // 2 + 1
        if self is FilterType.III:
            return order // 2
        return (order + 1) // 2


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # shortest repr keeps 0.3 as 3/10 instead of the binary expansion
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class Band:
    """Frequency band ``[lo*pi, hi*pi]`` with bounds ``lower <= H <= upper``."""

    lo: Fraction
    hi: Fraction
    lower: float
    upper: float

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_fraction(self.lo))
        object.__setattr__(self, "hi", _as_fraction(self.hi))
        if not (0 <= self.lo <= self.hi <= 1):
            raise SpecError(f"band edges must satisfy 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")
        if self.lower > self.upper:
            raise SpecError(f"band [{self.lo}, {self.hi}]: lower bound {self.lower} exceeds upper {self.upper}")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x_over_pi: float, tol: float = 1e-12) -> bool:
        return float(self.lo) - tol <= x_over_pi <= float(self.hi) + tol


@dataclass(frozen=True)
class Gain:
    """Gain mode: fixed at ``value`` or variable in ``[lo, hi]``."""

    variable: bool = False
    value: float = 1.0
    lo: float = 2.0 / 3.0
    hi: float = 4.0 / 3.0

    @classmethod
    def fixed(cls, value: float = 1.0) -> "Gain":
        return cls(variable=False, value=value, lo=value, hi=value)

    @classmethod
    def interval(cls, lo: float = 2.0 / 3.0, hi: float = 4.0 / 3.0) -> "Gain":
        if not 0 < lo <= hi:
            raise SpecError(f"gain interval must satisfy 0 < lo <= hi, got [{lo}, {hi}]")
        return cls(variable=True, value=1.0, lo=lo, hi=hi)

    @classmethod
    def parse(cls, text: str) -> "Gain":
        """Parse the CLI forms ``fixed:v``, ``variable`` and ``variable:lo:hi``."""
        parts = text.split(":")
        kind = parts[0].strip().lower()
        try:
            if kind == "fixed":
                return cls.fixed(float(parts[1]) if len(parts) > 1 else 1.0)
            if kind == "variable":
                if len(parts) == 1:
                    return cls.interval()
                if len(parts) == 3:
                    return cls.interval(float(parts[1]), float(parts[2]))
        except ValueError:
            pass
        raise SpecError(f"cannot parse gain {text!r}; expected fixed:v or variable[:lo:hi]")

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.lo, self.hi) if self.variable else (self.value, self.value)

    def to_dict(self) -> dict:
        if self.variable:
            return {"mode": "variable", "lo": self.lo, "hi": self.hi}
        return {"mode": "fixed", "value": self.value}


@dataclass(frozen=True)
class FilterSpec:
    bands: tuple[Band, ...]
    order: int
    ftype: FilterType
    wordlength: int
    gain: Gain = field(default_factory=Gain.fixed)
    allow_error: float = 0.0
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        object.__setattr__(self, "ftype", FilterType.parse(self.ftype))
        if not self.bands:
            raise SpecError("specification needs at least one band")
        if self.order < 0:
            raise SpecError("filter order must be nonnegative")
        if not self.ftype.order_is_valid(self.order):
            parity = "even" if self.ftype in (FilterType.I, FilterType.III) else "odd"
            raise SpecError(f"type {self.ftype.value} filters need {parity} order, got N={self.order}")
        if self.num_coefficients < 1:
            raise SpecError(f"type {self.ftype.value} with N={self.order} has no free coefficients")
        if not 1 <= self.wordlength <= MAX_WORDLENGTH:
            raise SpecError(f"word length must lie in [1, {MAX_WORDLENGTH}], got {self.wordlength}")
        if self.allow_error < 0:
            raise SpecError("allow_error must be nonnegative")
        ordered = sorted(self.bands, key=lambda b: (b.lo, b.hi))
        for a, b in zip(ordered, ordered[1:]):
            if b.lo < a.hi:
                raise SpecError(f"bands [{a.lo}, {a.hi}] and [{b.lo}, {b.hi}] overlap")

    @property
    def num_coefficients(self) -> int:
        """M, derived from order and type."""
        return self.ftype.num_coefficients(self.order)

    @property
    def scale(self) -> int:
        return 1 << self.wordlength

    @property
    def coefficient_limit(self) -> int:
        """Largest allowed coefficient magnitude (inclusive)."""
        return 1 << self.wordlength

    def widened(self) -> "FilterSpec":
        """Copy with every band bound relaxed by ``allow_error``."""
        if not self.allow_error:
            return self
        eps = self.allow_error
        bands = tuple(replace(b, lower=b.lower - eps, upper=b.upper + eps) for b in self.bands)
        return replace(self, bands=bands, allow_error=0.0)

    def with_(self, **changes) -> "FilterSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = {
            "type": self.ftype.value,
            "order": self.order,
            "wordlength": self.wordlength,
            "gain": self.gain.to_dict(),
            "bands": [
                {"from_pi": float(b.lo), "to_pi": float(b.hi), "lower": b.lower, "upper": b.upper}
                for b in self.bands
            ],
        }
        if self.allow_error:
            d["allow_error"] = self.allow_error
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FilterSpec":
        try:
            gain_d = d.get("gain", {"mode": "fixed", "value": 1.0})
            mode = str(gain_d.get("mode", "fixed")).lower()
            if mode == "variable":
                gain = Gain.interval(float(gain_d.get("lo", 2 / 3)), float(gain_d.get("hi", 4 / 3)))
            elif mode == "fixed":
                gain = Gain.fixed(float(gain_d.get("value", 1.0)))
            else:
                raise SpecError(f"unknown gain mode {mode!r}")
            bands = tuple(
                Band(_as_fraction(b["from_pi"]), _as_fraction(b["to_pi"]), float(b["lower"]), float(b["upper"]))
                for b in d["bands"]
            )
            return cls(
                bands=bands,
                order=int(d["order"]),
                ftype=FilterType.parse(d["type"]),
                wordlength=int(d["wordlength"]),
                gain=gain,
                allow_error=float(d.get("allow_error", 0.0)),
                name=d.get("name"),
            )
        except (KeyError, TypeError) as exc:
            raise SpecError(f"malformed specification: {exc}") from exc

    @classmethod
    def load(cls, path) -> "FilterSpec":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def basis_eval(ftype: FilterType, m: int, omega, num_coefficients: int | None = None):
    """Trigonometric basis function ``c_m(omega)`` of the zero-phase response.

    ``omega`` may be a scalar or an array (radians). ``num_coefficients``, when
    given, enforces ``0 <= m < M``.
    """
    ftype = FilterType.parse(ftype)
    if m < 0 or (num_coefficients is not None and m >= num_coefficients):
        raise IndexError(f"coefficient index {m} out of range")
    omega = np.asarray(omega, dtype=float)
    if ftype is FilterType.I:
        out = np.ones_like(omega) if m == 0 else 2.0 * np.cos(omega * m)
    elif ftype is FilterType.II:
        out = 2.0 * np.cos(omega * (m + 0.5))
    elif ftype is FilterType.III:
        out = 2.0 * np.sin(omega * (m + 1))
    else:
        out = 2.0 * np.sin(omega * (m + 0.5))
    return float(out) if out.ndim == 0 else out


def basis_matrix(ftype: FilterType, num_coefficients: int, omega) -> np.ndarray:
    """Matrix ``V[i, m] = c_m(omega_i)`` of shape ``(len(omega), M)``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    cols = [basis_eval(ftype, m, omega) for m in range(num_coefficients)]
    return np.column_stack(cols) if cols else np.zeros((omega.size, 0))


def zero_phase_response(h_int: Sequence[int], ftype: FilterType, omega):
    """Integer-scaled zero-phase response ``sum_m h'_m c_m(omega)``.

    Divide by ``G * 2**B`` to obtain the normalized response.
    """
    h = np.asarray(h_int, dtype=float)
    V = basis_matrix(ftype, h.size, omega)
    out = V @ h
    return float(out[0]) if np.ndim(omega) == 0 else out


def structural_adder_count(ftype: FilterType, order: int, zero_flags: Sequence[bool]) -> int:
    """Structural adders of a direct/transposed form given which coefficients vanish."""
    ftype = FilterType.parse(ftype)
    z = [bool(f) for f in zero_flags]
    if ftype is FilterType.I:
        count = order - (1 if z and z[0] else 0) - 2 * sum(z[1:])
    elif ftype is FilterType.III:
        count = order - 2 * sum(z[1:])
    else:
        count = order - 2 * sum(z)
    return max(count, 0)


def structural_adder_weights(ftype: FilterType, num_coefficients: int) -> list[int]:
    """Per-coefficient saving when ``h'_m = 0``; ``A_S = N - sum w_m [h'_m = 0]``."""
    ftype = FilterType.parse(ftype)
    w = [2] * num_coefficients
    if ftype is FilterType.I and w:
        w[0] = 1
    elif ftype is FilterType.III and w:
        w[0] = 0
    return w


def from_printed_order(coeffs: Sequence[int]) -> list[int]:
    """Printed lists run from the outer taps to the center tap; reverse into ``m`` order."""
    return [int(c) for c in reversed(list(coeffs))]


def to_printed_order(h: Sequence[int]) -> list[int]:
    return [int(c) for c in reversed(list(h))]


def redmill_spec(p_db: float, order: int, wordlength: int = 9, ftype="I", gain: Gain | None = None) -> FilterSpec:
    """Low-pass family with ``delta = 10**(-p/20)`` on ``[0, 0.3]`` / ``[0.5, 1]``."""
    delta = 10.0 ** (-p_db / 20.0)
    return FilterSpec(
        bands=(
            Band(Fraction(0), Fraction(3, 10), 1.0 - delta, 1.0 + delta),
            Band(Fraction(1, 2), Fraction(1), -delta, delta),
        ),
        order=order,
        ftype=FilterType.parse(ftype),
        wordlength=wordlength,
        gain=gain or Gain.fixed(1.0),
        name=f"redmill-p{p_db:g}",
    )


def lowpass_spec(pass_edge, stop_edge, delta_p, delta_s, **kwargs) -> FilterSpec:
    """Two-band low-pass ``[0, pass_edge]`` / ``[stop_edge, 1]`` (edges as fractions of pi)."""
    bands = (
        Band(Fraction(0), _as_fraction(pass_edge), 1.0 - delta_p, 1.0 + delta_p),
        Band(_as_fraction(stop_edge), Fraction(1), -delta_s, delta_s),
    )
    return FilterSpec(bands=bands, **kwargs)

