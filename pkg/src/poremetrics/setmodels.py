"""Closed-set oracles: distance queries, gap components, and the copy-contract-copy generator.

Every oracle represents a closed set.  One-dimensional oracles answer exact
Fraction distance queries and enumerate the connected components of a window
minus the set; higher-dimensional oracles answer certified distance brackets
and half-open box intersection tests, which is all the dyadic pore machinery
needs.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .dyadic import Cube
from .errors import PreconditionError
from .rationals import format_rational, parse_rational, sqrt_bracket

GENERATE_LEVEL_CAP = 14  # 3**14 + 1 points; beyond this use the length-law recursion


@dataclass(frozen=True)
class Component:
    """Maximal open interval of a window's interior disjoint from the set."""

    left: Fraction
    right: Fraction

    def __post_init__(self):
        if self.right <= self.left:
            raise PreconditionError("component needs right > left")

    @property
    def length(self) -> Fraction:
        return self.right - self.left


@dataclass(frozen=True)
class ContractionSequence:
    """The sequence {c_n} in (0, 1] driving the copy-contract-copy generator."""

    rule: str
    c: Fraction | None = None

    def __post_init__(self):
        if self.rule not in ("constant", "half_harmonic"):
            raise PreconditionError(f"unknown contraction rule {self.rule!r}")
        if self.rule == "constant":
            if self.c is None or not 0 < self.c <= 1:
                raise PreconditionError("constant rule needs c in (0, 1]")

    @classmethod
    def constant(cls, c) -> "ContractionSequence":
        return cls("constant", Fraction(c))

    @classmethod
    def half_harmonic(cls) -> "ContractionSequence":
        return cls("half_harmonic", None)

    def value(self, n: int) -> Fraction:
        """c_n, 1-indexed."""
        if n < 1:
            raise PreconditionError("contraction index starts at 1")
        if self.rule == "constant":
            return self.c
        return 1 - Fraction(1, 2 * n)


def generate(
    seq: ContractionSequence, level: int, with_reflection: bool = False
) -> tuple[tuple[Fraction, ...], tuple[Fraction, Fraction]]:
    """Point set of the level-``n`` generator stage and its envelope interval.

    Stage 0 is {0, 1}.  Each stage appends a copy contracted by c_n starting
    at the current last point, then an uncontracted copy starting at the last
    point of the contracted one; shared endpoints are stored once, so stage n
    has 3**n + 1 points.  With reflection the stage is mirrored through 0.
    """
    if level < 0:
        raise PreconditionError("level must be nonnegative")
    if level > GENERATE_LEVEL_CAP:
        raise PreconditionError(
            f"explicit enumeration is capped at level {GENERATE_LEVEL_CAP}"
        )
    pts = [Fraction(0), Fraction(1)]
    for i in range(1, level + 1):
        c = seq.value(i)
        last = pts[-1]
        contracted = [last + c * p for p in pts]
        shifted = [contracted[-1] + p for p in pts]
        pts = pts + contracted[1:] + shifted[1:]
    envelope = (pts[0], pts[-1])
    if with_reflection:
        pts = [-p for p in reversed(pts[1:])] + pts
        envelope = (pts[0], pts[-1])
    return tuple(pts), envelope


def envelope_length(seq: ContractionSequence, level: int) -> Fraction:
    """|Q_n| for the generator: the exact product of (2 + c_i)."""
    out = Fraction(1)
    for i in range(1, level + 1):
        out *= 2 + seq.value(i)
    return out


def envelope_cube(seq: ContractionSequence, level: int) -> Cube:
    """The envelope Q_n = [0, |Q_n|) as a one-dimensional root cube."""
    return Cube.interval(0, envelope_length(seq, level))


class SetOracle:
    """Common query surface over all set representations."""

    dimension: int = 1

    def distance(self, x) -> Fraction:
        raise NotImplementedError

    def distance_bracket(self, x) -> tuple[Fraction, Fraction]:
        """Certified [lo, hi] containing the Euclidean distance (n >= 1)."""
        d = self.distance(x)
        return d, d

    def meets_interval(self, lo: Fraction, hi: Fraction) -> bool:
        """Does the set intersect the half-open interval [lo, hi)?"""
        raise NotImplementedError

    def meets_cube(self, cube: Cube) -> bool:
        if cube.dimension != self.dimension:
            raise PreconditionError("cube/oracle dimension mismatch")
        if self.dimension == 1:
            lo, hi = cube.as_interval()
            return self.meets_interval(lo, hi)
        raise NotImplementedError

    def components(self, lo: Fraction, hi: Fraction) -> list[Component]:
        raise PreconditionError("component enumeration needs a 1-D oracle")

    def points_in_window(self, lo: Fraction, hi: Fraction):
        """Sorted points of the set inside [lo, hi), or None when the set is
        not point-representable there (enables the exact histogram fast path)."""
        return None

    def is_measure_zero(self) -> bool:
        return True

    def spec_dict(self) -> dict:
        raise NotImplementedError


class _SortedPoints1D(SetOracle):
    """Shared logic for oracles backed by a finite sorted point list."""

    points: tuple

    def distance(self, x) -> Fraction:
        x = Fraction(x)
        pts = self.points
        i = bisect_left(pts, x)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(pts):
                d = abs(x - pts[j])
                best = d if best is None or d < best else best
        if best is None:
            raise PreconditionError("empty point set")
        return best

    def meets_interval(self, lo, hi) -> bool:
        lo, hi = Fraction(lo), Fraction(hi)
        i = bisect_left(self.points, lo)
        return i < len(self.points) and self.points[i] < hi

    def _interior_points(self, lo, hi):
        i = bisect_right(self.points, lo)
        j = bisect_left(self.points, hi)
        return self.points[i:j]

    def points_in_window(self, lo, hi):
        i = bisect_left(self.points, Fraction(lo))
        j = bisect_left(self.points, Fraction(hi))
        return self.points[i:j]

    def components(self, lo, hi) -> list[Component]:
        lo, hi = Fraction(lo), Fraction(hi)
        if hi <= lo:
            raise PreconditionError("window needs hi > lo")
        cuts = [lo] + list(self._interior_points(lo, hi)) + [hi]
        return [
            Component(a, b) for a, b in zip(cuts, cuts[1:]) if b > a
        ]


@dataclass(frozen=True)
class FinitePoints(_SortedPoints1D):
    """A finite set of points on the line, stored strictly sorted."""

    points: tuple

    dimension = 1

    def __post_init__(self):
        pts = tuple(Fraction(p) for p in self.points)
        if not pts:
            raise PreconditionError("FinitePoints needs at least one point")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise PreconditionError("points must be strictly sorted")
        object.__setattr__(self, "points", pts)

    def spec_dict(self) -> dict:
        return {"type": "points", "points": [format_rational(p) for p in self.points]}


@dataclass(frozen=True)
class IntegerLattice(SetOracle):
    """The integers as a subset of the line."""

    dimension = 1

    def distance(self, x) -> Fraction:
        x = Fraction(x)
        f = x - math.floor(x)
        return min(f, 1 - f)

    def meets_interval(self, lo, hi) -> bool:
        return math.ceil(Fraction(lo)) < Fraction(hi)

    def components(self, lo, hi) -> list[Component]:
        lo, hi = Fraction(lo), Fraction(hi)
        if hi <= lo:
            raise PreconditionError("window needs hi > lo")
        first = math.floor(lo) + 1
        last = math.ceil(hi) - 1
        cuts = [lo] + [Fraction(k) for k in range(first, last + 1) if lo < k < hi] + [hi]
        return [Component(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]

    def points_in_window(self, lo, hi):
        lo, hi = Fraction(lo), Fraction(hi)
        first = math.ceil(lo)
        return tuple(Fraction(k) for k in range(first, math.ceil(hi)) if k < hi)

    def spec_dict(self) -> dict:
        return {"type": "lattice"}


@dataclass(frozen=True)
class Generated(_SortedPoints1D):
    """A materialized generator stage E_n (optionally reflected through 0)."""

    seq: ContractionSequence
    level: int
    with_reflection: bool = False
    points: tuple = field(init=False)
    envelope: tuple = field(init=False)

    dimension = 1

    def __post_init__(self):
        pts, env = generate(self.seq, self.level, self.with_reflection)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "envelope", env)

    def envelope_cube(self) -> Cube:
        return Cube.interval(self.envelope[0], self.envelope[1])

    def spec_dict(self) -> dict:
        contraction = {"rule": self.seq.rule}
        if self.seq.rule == "constant":
            contraction["c"] = format_rational(self.seq.c)
        return {
            "type": "generated",
            "contraction": contraction,
            "level": self.level,
            "reflect": self.with_reflection,
        }


@dataclass(frozen=True)
class PointCloud(SetOracle):
    """A finite point set in R**n; distances are certified brackets."""

    points: tuple  # tuple of coordinate tuples

    def __post_init__(self):
        pts = tuple(tuple(Fraction(c) for c in p) for p in self.points)
        if not pts:
            raise PreconditionError("PointCloud needs at least one point")
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise PreconditionError("points must share a dimension")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dimension", len(pts[0]))

    def distance_sq(self, x) -> Fraction:
        xs = tuple(Fraction(c) for c in x)
        return min(
            sum((a - b) ** 2 for a, b in zip(xs, p)) for p in self.points
        )

    def distance(self, x) -> Fraction:
        if self.dimension == 1:
            return min(abs(Fraction(x[0] if isinstance(x, tuple) else x) - p[0]) for p in self.points)
        raise PreconditionError("exact distance is 1-D only; use distance_bracket")

    def distance_bracket(self, x):
        return sqrt_bracket(self.distance_sq(x))

    def meets_cube(self, cube: Cube) -> bool:
        lo, hi = cube.lower(), cube.upper()
        return any(
            all(a <= c < b for a, c, b in zip(lo, p, hi)) for p in self.points
        )

    def meets_interval(self, lo, hi) -> bool:
        if self.dimension != 1:
            raise PreconditionError("meets_interval is 1-D only")
        return any(lo <= p[0] < hi for p in self.points)

    def spec_dict(self) -> dict:
        return {
            "type": "points",
            "points": [[format_rational(c) for c in p] for p in self.points],
        }


@dataclass(frozen=True)
class BoxUnion(SetOracle):
    """A finite union of closed axis-aligned boxes (possibly degenerate)."""

    boxes: tuple  # tuple of (lows, highs) coordinate tuples

    def __post_init__(self):
        bx = []
        for lows, highs in self.boxes:
            lows = tuple(Fraction(c) for c in lows)
            highs = tuple(Fraction(c) for c in highs)
            if len(lows) != len(highs):
                raise PreconditionError("box corner dimension mismatch")
            if any(h < l for l, h in zip(lows, highs)):
                raise PreconditionError("box needs highs >= lows")
            bx.append((lows, highs))
        if not bx:
            raise PreconditionError("BoxUnion needs at least one box")
        dims = {len(l) for l, _ in bx}
        if len(dims) != 1:
            raise PreconditionError("boxes must share a dimension")
        object.__setattr__(self, "boxes", tuple(bx))
        object.__setattr__(self, "dimension", len(bx[0][0]))

    def distance_sq(self, x) -> Fraction:
        xs = tuple(Fraction(c) for c in (x if isinstance(x, tuple) else (x,)))
        best = None
        for lows, highs in self.boxes:
            d = Fraction(0)
            for c, l, h in zip(xs, lows, highs):
                if c < l:
                    d += (l - c) ** 2
                elif c > h:
                    d += (c - h) ** 2
            best = d if best is None or d < best else best
        return best

    def distance(self, x) -> Fraction:
        if self.dimension != 1:
            raise PreconditionError("exact distance is 1-D only; use distance_bracket")
        xs = Fraction(x if not isinstance(x, tuple) else x[0])
        best = None
        for (l,), (h,) in self.boxes:
            d = max(Fraction(0), l - xs, xs - h)
            best = d if best is None or d < best else best
        return best

    def distance_bracket(self, x):
        return sqrt_bracket(self.distance_sq(x))

    def meets_cube(self, cube: Cube) -> bool:
        lo, hi = cube.lower(), cube.upper()
        return any(
            all(l < b and h >= a for l, h, a, b in zip(lows, highs, lo, hi))
            for lows, highs in self.boxes
        )

    def meets_interval(self, lo, hi) -> bool:
        if self.dimension != 1:
            raise PreconditionError("meets_interval is 1-D only")
        return any(l < hi and h >= lo for (l,), (h,) in self.boxes)

    def components(self, lo, hi) -> list[Component]:
        if self.dimension != 1:
            raise PreconditionError("component enumeration needs a 1-D oracle")
        lo, hi = Fraction(lo), Fraction(hi)
        if hi <= lo:
            raise PreconditionError("window needs hi > lo")
        segs = sorted((l, h) for (l,), (h,) in self.boxes if l < hi and h > lo)
        out = []
        cursor = lo
        for l, h in segs:
            if l > cursor:
                out.append(Component(cursor, min(l, hi)))
            cursor = max(cursor, h)
            if cursor >= hi:
                break
        if cursor < hi:
            out.append(Component(cursor, hi))
        return out

    def is_measure_zero(self) -> bool:
        return all(
            any(l == h for l, h in zip(lows, highs)) for lows, highs in self.boxes
        )

    def spec_dict(self) -> dict:
        raise PreconditionError("box unions have no file representation")


def oracle_from_spec(spec: dict) -> SetOracle:
    """Build an oracle from the set-spec JSON dictionary."""
    kind = spec.get("type")
    if kind == "lattice":
        return IntegerLattice()
    if kind == "points":
        raw = spec["points"]
        if raw and isinstance(raw[0], list):
            return PointCloud(tuple(tuple(parse_rational(c) for c in p) for p in raw))
        return FinitePoints(tuple(parse_rational(p) for p in raw))
    if kind == "generated":
        contraction = spec["contraction"]
        if contraction["rule"] == "constant":
            seq = ContractionSequence.constant(parse_rational(contraction["c"]))
        else:
            seq = ContractionSequence.half_harmonic()
        return Generated(seq, int(spec["level"]), bool(spec.get("reflect", False)))
    raise PreconditionError(f"unknown set spec type {kind!r}")


def load_set_spec(path) -> SetOracle:
    with open(path, "r", encoding="utf-8") as fh:
        return oracle_from_spec(json.load(fh))


def save_set_spec(oracle: SetOracle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(oracle.spec_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
