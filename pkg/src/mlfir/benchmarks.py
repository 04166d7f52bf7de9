"""Reference low-pass specifications and published coefficient sets."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exceptions import SpecError
from .spec import Band, FilterSpec, FilterType, Gain, from_printed_order, redmill_spec

__all__ = [
    "BENCHMARKS",
    "BenchmarkSpec",
    "PUBLISHED_DESIGNS",
    "PublishedDesign",
    "benchmark_spec",
    "default_gain",
    "redmill_spec",
]


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    bands: tuple[Band, ...]
    note: str = ""


def _lowpass(name, passband, stopband, dp, ds, note=""):
    bands = (
        Band(Fraction(passband[0]), Fraction(passband[1]), 1.0 - dp, 1.0 + dp),
        Band(Fraction(stopband[0]), Fraction(stopband[1]), -ds, ds),
    )
    return BenchmarkSpec(name, tuple(sorted(bands, key=lambda b: b.lo)), note)


BENCHMARKS: dict[str, BenchmarkSpec] = {
    b.name: b
    for b in (
        _lowpass("S1a", ("0", "3/10"), ("1/2", "1"), 0.00645, 0.00645, "equal-ripple low-pass"),
        _lowpass("S1b", ("0", "3/10"), ("1/2", "1"), 0.00636, 0.00636, "equal-ripple low-pass"),
        _lowpass("S1c", ("0", "3/10"), ("1/2", "1"), 0.0157, 0.0066, "low-pass"),
        _lowpass("S2a", ("0", "21/500"), ("7/50", "1"), 0.0116, 0.001, "narrow low-pass"),
        _lowpass("S2b", ("0", "21/500"), ("7/50", "1"), 0.012, 0.001, "narrow low-pass"),
        _lowpass("L1", ("4/5", "1"), ("0", "37/50"), 0.0057, 0.0001, "high-pass, long"),
        _lowpass("L2", ("0", "1/5"), ("7/25", "1"), 0.028, 0.001, "low-pass, long"),
        BenchmarkSpec(
            "L3",
            (
                Band(Fraction(0), Fraction(3, 20), 0.9772, 1.0232),
                Band(Fraction(3, 20), Fraction(3, 16), 0.9441, 1.0232),
                Band(Fraction(3, 16), Fraction(17, 80), 0.9016, 1.0232),
                Band(Fraction(23, 80), Fraction(1), -0.0316, 0.0316),
            ),
            "three-segment passband with a sloped lower bound",
        ),
    )
}


def default_gain(ftype) -> Gain:
    """Variable gain interval matched to the DC sum of the basis.

    Types II and IV have no center tap, so their zero-phase response is about
    twice that of a type I filter with the same coefficient magnitudes.
    """
    ftype = FilterType.parse(ftype)
    if ftype in (FilterType.II, FilterType.IV):
        return Gain.interval(4.0 / 3.0, 8.0 / 3.0)
    return Gain.interval()


def benchmark_spec(name: str, order: int, ftype, wordlength: int, gain: Gain | None = None,
                   allow_error: float = 0.0) -> FilterSpec:
    if name.lower().startswith("redmill"):
        # redmill:p or redmill-p
        p = float(name.replace(":", "-").split("-", 1)[1])
        spec = redmill_spec(p, order, wordlength, ftype, gain)
        return spec.with_(allow_error=allow_error)
    try:
        b = BENCHMARKS[name]
    except KeyError:
        raise SpecError(f"unknown benchmark {name!r}; known: {', '.join(BENCHMARKS)} and redmill-<p>") from None
    return FilterSpec(
        bands=b.bands,
        order=order,
        ftype=FilterType.parse(ftype),
        wordlength=wordlength,
        gain=gain if gain is not None else default_gain(ftype),
        allow_error=allow_error,
        name=name,
    )


@dataclass(frozen=True)
class PublishedDesign:
    """A coefficient set from the literature with its reported figures.

    ``origin`` is ``"ilp"`` for designs produced by the optimal method and a
    citation key otherwise. ``coefficients`` are in printed order (center tap last).
    """

    name: str
    origin: str
    order: int
    ftype: str
    a_m: int
    a_s: int
    a: int
    ad: int
    gain: float
    wordlength: int
    error: float
    coefficients: tuple[int, ...]

    @property
    def h(self) -> list[int]:
        return from_printed_order(self.coefficients)

    def spec(self) -> FilterSpec:
        return benchmark_spec(self.name, self.order, self.ftype, self.wordlength, Gain.fixed(self.gain))

    @property
    def label(self) -> str:
        return f"{self.name}-{self.origin}-{self.ftype}-N{self.order}-B{self.wordlength}-G{self.gain:g}"


def _row(name, origin, N, t, am, as_, a, ad, g, B, err, coeffs):
    return PublishedDesign(name, origin, N, t, am, as_, a, ad, g, B, err, tuple(int(c) for c in coeffs.split()))


PUBLISHED_DESIGNS: tuple[PublishedDesign, ...] = (
    _row("S1a", "s89", 24, "I", 11, 24, 35, 2, 2.41, 8, 0.00159, "1 3 -1 -8 -7 10 20 -1 -40 -34 56 184 246"),
    _row("S1a", "ilp", 24, "I", 7, 20, 27, 2, 1.251, 9, 0, "1 4 0 -8 -7 10 22 0 -41 -36 57 192 256"),
    _row("S1a", "ilp", 24, "I", 6, 20, 26, 2, 1.245678, 9, 0.00159, "1 4 0 -8 -8 10 22 0 -40 -37 57 192 256"),
    _row("S1a", "ilp", 23, "II", 7, 19, 26, 2, 2.654716, 8, 0, "3 3 -5 -11 0 20 16 -23 -52 0 134 253"),
    _row("S1a", "ilp", 23, "II", 5, 19, 24, 2, 2.172388, 8, 0.00159, "2 2 -3 -9 0 16 13 -18 -42 0 110 208"),
    _row("S1b", "rbd00", 24, "I", 6, 20, 26, 3, 2.4570, 9, 0, "2 8 0 -16 -14 20 43 0 -80 -71 112 377 502"),
    _row("S1b", "ilp", 24, "I", 6, 20, 26, 2, 1.40946, 9, 0, "2 4 0 -10 -8 12 24 0 -47 -40 65 216 288"),
    _row("S1b", "ilp", 23, "II", 5, 19, 24, 2, 2.46492, 9, 0, "6 6 -8 -21 0 36 32 -42 -96 0 248 472"),
    _row("S1b", "ilp", 23, "II", 7, 19, 26, 2, 2.65462, 8, 0, "3 3 -5 -11 0 20 16 -23 -52 0 134 253"),
    _row("S1c", "yl07", 24, "I", 4, 24, 28, 2, 1.8950, 8, 0, "2 3 -2 -8 -4 10 16 -3 -32 -24 48 144 191"),
    _row("S1c", "ilp", 24, "I", 5, 20, 25, 2, 1.25615, 8, 0, "1 2 0 -4 -3 6 11 0 -21 -18 29 96 128"),
    _row("S1c", "ilp", 23, "II", 5, 19, 24, 2, 1.86904, 7, 0, "1 1 -2 -4 0 7 6 -8 -18 0 47 89"),
    _row("S1c", "sy11a", 23, "II", 4, 19, 23, 2, 1.34766, 8, 0.00118, "2 2 -2 -5 0 10 8 -12 -26 0 68 128"),
    _row("S1c", "ilp", 23, "II", 4, 19, 23, 2, 1.34717, 8, 0.00118, "2 2 -2 -5 0 10 8 -12 -26 0 68 128"),
    _row("S2a", "s89", 59, "II", 57, 59, 116, 2, 7.1324, 13, 0,
         "31 28 29 22 8 -17 -59 -116 -188 -268 -352 -432 -500 -532 -529 -464 -336 -129 158 526 964 1472 "
         "2008 2576 3136 3648 4110 4478 4737 4868"),
    _row("S2a", "ilp", 59, "II", 22, 59, 81, 2, 9.25424, 10, 0,
         "4 4 4 4 1 -2 -9 -18 -30 -42 -56 -69 -80 -86 -85 -76 -56 -22 24 84 155 236 325 416 508 593 668 728 770 792"),
    _row("S2b", "yl07", 59, "II", 19, 59, 78, 3, 10.6888, 10, 0,
         "5 5 6 5 3 -2 -10 -20 -32 -48 -64 -80 -91 -99 -99 -88 -64 -26 28 96 178 273 376 482 587 686 772 842 892 916"),
    _row("S2b", "yl07", 59, "II", 21, 59, 80, 2, 10.48712, 10, 0,
         "5 5 5 4 2 -4 -10 -20 -34 -48 -64 -78 -91 -98 -96 -86 -62 -24 28 96 176 269 369 473 575 672 756 824 872 897"),
    _row("S2b", "ilp", 59, "II", 19, 57, 76, 2, 10.506472, 10, 0,
         "4 4 5 4 0 -4 -11 -22 -34 -49 -64 -79 -90 -98 -96 -84 -60 -24 30 97 178 270 370 474 576 672 756 824 872 896"),
    _row("S2b", "sy11a", 59, "II", 17, 59, 76, 3, 10.47032, 10, 0.01395,
         "5 5 6 5 2 -2 -10 -20 -32 -48 -64 -78 -92 -98 -87 -65 -26 26 93 174 267 368 472 575 672 757 826 874 898"),
    _row("S2b", "ilp", 59, "II", 15, 51, 66, 2, 7.5904, 10, 0.00789,
         "0 0 0 -2 -5 -10 -16 -23 -32 -40 -50 -58 -64 -64 -61 -50 -29 0 38 86 143 206 274 344 412 476 532 576 608 624"),
    _row("L2", "yl07", 62, "I", 17, 62, 79, 3, 2.6668, 11, 0,
         "4 9 13 12 4 -10 -26 -36 -32 -12 18 44 52 32 -10 -56 -80 -64 -4 74 130 128 48 -86 -215 -263 -168 88 460 "
         "854 1153 1265"),
    _row("L2", "ilp", 62, "I", 16, 62, 78, 3, 2.6668, 11, 0,
         "4 9 13 12 4 -10 -26 -36 -32 -12 18 44 52 32 -10 -56 -80 -64 -4 74 130 128 48 -86 -215 -263 -168 88 460 "
         "854 1153 1265"),
    _row("L3", "yl07", 35, "II", 3, 35, 38, 2, 3.192, 8, 0, "8 1 -6 -12 -10 -1 6 20 20 6 -12 -32 -40 -16 32 96 160 196"),
    _row("L3", "ilp", 35, "II", 5, 33, 38, 2, 2.58268, 7, 0, "4 0 -2 -4 -4 -1 4 7 8 3 -5 -14 -16 -7 12 39 64 79"),
    _row("L3", "ilp", 35, "II", 5, 31, 36, 1, 2.6257, 8, 0, "7 0 -5 -8 -10 0 6 15 15 8 -12 -28 -32 -14 24 80 130 160"),
    _row("L3", "ilp", 35, "II", 4, 31, 35, 2, 2.10468, 8, 0, "5 0 -4 -8 -8 0 4 11 13 5 -10 -22 -26 -11 20 64 104 129"),
    _row("L3", "sy11a", 35, "II", 4, 31, 35, 1, 2.627, 7, 0.00213, "3 0 -2 -5 -5 0 3 7 8 3 -6 -14 -16 -7 12 40 65 80"),
    _row("L3", "ilp", 35, "II", 4, 31, 35, 1, 2.61998, 7, 0.00213, "3 0 -2 -4 -6 0 3 7 7 4 -6 -14 -16 -7 12 40 65 80"),
    _row("L3", "ilp", 35, "II", 5, 29, 34, 2, 2.6211, 8, 0.00213, "7 0 0 -10 -8 0 8 16 16 7 -10 -28 -32 -14 24 78 130 160"),
    _row("L3", "ilp", 35, "II", 3, 31, 34, 1, 2.60028, 8, 0.00213, "6 0 -3 -10 -10 0 7 12 16 7 -12 -28 -32 -14 24 80 128 160"),
    _row("L3", "ilp", 35, "II", 3, 31, 34, 2, 2.60564, 7, 0.00213, "4 0 -2 -4 -4 0 3 8 8 3 -6 -13 -16 -8 13 40 64 80"),
)
