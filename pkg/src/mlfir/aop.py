"""Generalized add operations and the stage-wise reachable fundamental sets.

``A_q(u, v) = |2**lu * u + (-1)**sv * 2**lv * v| * 2**-r`` restricted to odd
positive results not exceeding ``c_max``.
"""
from __future__ import annotations

import functools
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import MlfirError

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"MLFS"
CACHE_VERSION = 1
DEFAULT_TRIPLET_CAP = 1 << 22


@dataclass(frozen=True, order=True)
class AOpConfig:
    """Shift/sign configuration ``(r, lu, lv, sv)``; field order is the tie-break order."""

    r: int
    lu: int
    lv: int
    sv: int

    def apply(self, u: int, v: int) -> int | None:
        """Result of the operation, or ``None`` if it is not an odd positive integer."""
        num = abs((u << self.lu) + (-1) ** self.sv * (v << self.lv))
        if num == 0 or num % (1 << self.r):
            return None
        w = num >> self.r
        return w if w & 1 else None


def odd_part(w: int) -> int:
    """``w`` divided by its largest power-of-two divisor."""
    if w <= 0:
        raise ValueError("odd part is defined for positive integers only")
    return w >> ((w & -w).bit_length() - 1)


def max_shift(c_max: int) -> int:
    return c_max.bit_length()  # log2(c_max) + 1 for powers of two


def a_star(u: int, v: int, c_max: int) -> set[int]:
    """All odd positive ``A_q(u, v) <= c_max`` over valid configurations."""
    out = set()
    L = max_shift(c_max)
    for s in (u + v, abs(u - v)):
        if s:
            w = odd_part(s)
            if w <= c_max:
                out.add(w)
    for l in range(1, L + 1):
        for a, b in ((u, v), (v, u)):
            big = a << l
            for w in (big + b, abs(big - b)):
                if 0 < w <= c_max:
                    out.add(w)
    return out


def a_configs(u: int, v: int, w: int, c_max: int) -> list[AOpConfig]:
    """Every configuration with ``A_q(u, v) = w``, sorted by ``(r, lu, lv, sv)``."""
    L = max_shift(c_max)
    found = []
    for r in range(0, 2 * L + 2):
        for lu in range(L + 1):
            for lv in range(L + 1):
                for sv in (0, 1):
                    q = AOpConfig(r, lu, lv, sv)
                    if q.apply(u, v) == w:
                        found.append(q)
    return sorted(found)


def first_config(u: int, v: int, w: int, c_max: int) -> AOpConfig:
    """Smallest configuration producing ``w``; cheap search over the canonical shapes."""
    L = max_shift(c_max)
    for r in range(0, 2 * L + 2):
        for lu in range(L + 1):
            for lv in range(L + 1):
                for sv in (0, 1):
                    q = AOpConfig(r, lu, lv, sv)
                    if q.apply(u, v) == w:
                        return q
    raise MlfirError(f"{w} is not reachable from ({u}, {v})")


def max_adder_depth(wordlength: int) -> int:
    """Upper bound on the adder depth needed for any ``B``-bit coefficient (ceiling applied)."""
    if wordlength < 1:
        raise ValueError("word length must be positive")
    n = (wordlength + 1) // 2 + 1
    return (n - 1).bit_length()


@dataclass(frozen=True)
class StageSets:
    """Reachable fundamentals per stage and the triplets explaining them.

    ``values[s]`` is the sorted stage-``s`` set (``values[0] == (1,)``);
    ``triplets[s]`` (``s >= 1``) holds sorted ``(u, v, w)`` with ``u <= v`` in
    ``values[s-1]`` and ``w`` reachable from them by one operation.
    """

    wordlength: int
    stages: int
    c_max: int
    values: tuple[tuple[int, ...], ...]
    triplets: tuple[tuple[tuple[int, int, int], ...], ...]

    def by_output(self, s: int) -> dict[int, list[tuple[int, int]]]:
        out: dict[int, list[tuple[int, int]]] = {}
        for u, v, w in self.triplets[s]:
            out.setdefault(w, []).append((u, v))
        return out


def _stage_triplets(prev: tuple[int, ...], c_max: int, cap: int, count: int):
    trips = []
    for i, u in enumerate(prev):
        for v in prev[i:]:
            for w in sorted(a_star(u, v, c_max)):
                trips.append((u, v, w))
            if count + len(trips) > cap:
                raise MlfirError(
                    f"stage-set construction exceeds the cap of {cap} triplets; "
                    "lower the adder depth or word length, or raise the cap"
                )
    trips.sort()
    return trips


def _cache_dir() -> Path | None:
    d = os.environ.get("MLFIR_CACHE_DIR")
    if d == "":
        return None
    return Path(d) if d else Path.home() / ".cache" / "mlfir"


def write_stage_cache(path, sets: StageSets) -> None:
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC)
        f.write(struct.pack("<III", CACHE_VERSION, sets.wordlength, sets.stages))
        for vals in sets.values:
            f.write(struct.pack("<I", len(vals)))
            f.write(np.asarray(vals, dtype="<u4").tobytes())
        for s in range(1, sets.stages + 1):
            trips = sets.triplets[s]
            f.write(struct.pack("<I", len(trips)))
            f.write(np.asarray(trips, dtype="<u4").reshape(-1).tobytes())


def read_stage_cache(path) -> StageSets:
    data = Path(path).read_bytes()
    if data[:4] != CACHE_MAGIC:
        raise MlfirError(f"{path}: not a stage-set cache file")
    version, B, S = struct.unpack_from("<III", data, 4)
    if version != CACHE_VERSION:
        raise MlfirError(f"{path}: cache version {version}, expected {CACHE_VERSION}")
    pos = 16
    values = []
    for _ in range(S + 1):
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        values.append(tuple(int(x) for x in np.frombuffer(data, dtype="<u4", count=n, offset=pos)))
        pos += 4 * n
    triplets = [()]
    for _ in range(S):
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        arr = np.frombuffer(data, dtype="<u4", count=3 * n, offset=pos).reshape(-1, 3)
        triplets.append(tuple((int(a), int(b), int(c)) for a, b, c in arr))
        pos += 12 * n
    return StageSets(B, S, 1 << (B + 1), tuple(values), tuple(triplets))


@functools.lru_cache(maxsize=16)
def _build(wordlength: int, stages: int, cap: int) -> StageSets:
    c_max = 1 << (wordlength + 1)
    values = [(1,)]
    triplets: list[tuple] = [()]
    count = 0
    for _ in range(stages):
        trips = _stage_triplets(values[-1], c_max, cap, count)
        count += len(trips)
        triplets.append(tuple(trips))
        values.append(tuple(sorted({w for _, _, w in trips})))
    return StageSets(wordlength, stages, c_max, tuple(values), tuple(triplets))


def build_stage_sets(wordlength: int, stages: int, cap: int = DEFAULT_TRIPLET_CAP, use_cache: bool = True) -> StageSets:
    """Stage sets for ``B = wordlength`` and ``stages`` adder stages (memoized, optionally on disk)."""
    if stages < 0:
        raise ValueError("stage count must be nonnegative")
    cache = _cache_dir() if use_cache else None
    path = cache / f"stages_B{wordlength}_S{stages}_v{CACHE_VERSION}.bin" if cache else None
    if path is not None and path.exists():
        try:
            return read_stage_cache(path)
        except (MlfirError, struct.error, ValueError) as exc:
            logger.warning("ignoring unreadable stage cache %s: %s", path, exc)
    sets = _build(wordlength, stages, cap)
    if path is not None and stages >= 3:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            write_stage_cache(path, sets)
        except OSError as exc:
            logger.warning("could not write stage cache %s: %s", path, exc)
    return sets
