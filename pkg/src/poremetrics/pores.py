"""Dyadic pore enumeration and the fraction-length statistics built on it.

A pore of a window cube is a dyadic subcube that misses the closed set while
its dyadic parent meets it.  Pores of equal generation share a side length,
so the enumeration keeps only a generation -> count histogram plus the exact
mass not yet classified below the deepest generation reached.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .dyadic import Cube
from .errors import InsufficientDepthError, PreconditionError
from .rationals import format_rational
from .setmodels import Component, SetOracle


class Side(Enum):
    LARGEST = "largest"
    SMALLEST = "smallest"


@dataclass(frozen=True)
class FractionQuery:
    """A mass-fraction threshold query, t in (0,1), on one side of the histogram."""

    t: Fraction
    side: Side
    over: str = "dyadic"  # "dyadic" (pore histogram) or "component" (gap lengths)

    def __post_init__(self):
        t = Fraction(self.t)
        object.__setattr__(self, "t", t)
        if not 0 < t < 1:
            raise PreconditionError("fraction threshold t must lie in (0, 1)")


@dataclass(frozen=True)
class LengthAnswer:
    """A side length, either exact or bracketed when depth left it ambiguous."""

    lo: Fraction
    hi: Fraction
    exact: bool

    @classmethod
    def exactly(cls, v) -> "LengthAnswer":
        v = Fraction(v)
        return cls(v, v, True)

    @classmethod
    def between(cls, lo, hi) -> "LengthAnswer":
        return cls(Fraction(lo), Fraction(hi), False)

    @property
    def value(self) -> Fraction:
        if not self.exact:
            raise PreconditionError("no exact value; inspect lo/hi")
        return self.lo


@dataclass(frozen=True)
class PoreFamily:
    """Generation histogram of the pores of a window, with exact tail mass.

    ``counts[j]`` pores of relative generation j each have side
    ``root.side * 2**-j``.  ``tail_mass`` is the window measure not covered by
    enumerated pores; when the oracle certifies measure zero it is exactly
    the pore mass still hiding below ``max_generation``.
    """

    root: Cube
    counts: dict
    max_generation: int
    tail_mass: Fraction
    tail_is_pore_mass: bool = True

    def length_of(self, gen: int) -> Fraction:
        return self.root.side / (1 << gen)

    def mass_of(self, gen: int) -> Fraction:
        n = self.root.dimension
        return self.counts[gen] * self.length_of(gen) ** n

    def entries(self):
        """(generation, length, count, mass) rows, largest length first."""
        return [
            (g, self.length_of(g), self.counts[g], self.mass_of(g))
            for g in sorted(self.counts)
        ]

    @property
    def enumerated_mass(self) -> Fraction:
        return sum((self.mass_of(g) for g in self.counts), Fraction(0))

    def maximal_pore_length(self) -> Fraction:
        if not self.counts:
            raise PreconditionError("empty pore family")
        return self.length_of(min(self.counts))

    def maximal_pore_count(self) -> int:
        """Number of pores attaining the maximal length (the cube itself may not be unique)."""
        if not self.counts:
            raise PreconditionError("empty pore family")
        return self.counts[min(self.counts)]


def enumerate_pore_cubes(oracle: SetOracle, q0: Cube, max_gen: int):
    """Yield the pore cubes of ``q0`` generation by generation (BFS).

    The frontier consists of cubes meeting the set; each child either stays
    on the frontier or is emitted as a pore, which makes the emitted cubes
    pairwise disjoint by construction.
    """
    if max_gen < 1:
        raise PreconditionError("max_gen must be at least 1")
    if not oracle.meets_cube(q0):
        raise PreconditionError(
            "window does not meet the set; use the whole-cube fast path"
        )
    frontier = [q0]
    for _ in range(max_gen):
        nxt = []
        for cube in frontier:
            for child in cube.children():
                if oracle.meets_cube(child):
                    nxt.append(child)
                else:
                    yield child
        frontier = nxt
        if not frontier:
            return


def _histogram_from_points(points, q0: Cube, max_gen: int) -> dict:
    """Per-generation pore counts for a sorted in-window point list.

    In one dimension the number of pores at generation j equals the number of
    empty cells minus twice the empty cells one generation up, and empty cells
    are counted from the distinct dyadic indices of the points.  Index bits
    come from doubling the remainder of (p - lo)/side, so everything is exact
    integer arithmetic.
    """
    lo, _ = q0.as_interval()
    side = q0.side
    nums, dens = [], []
    for p in points:
        r = (p - lo) / side
        nums.append(r.numerator)
        dens.append(r.denominator)
    counts: dict = {}
    prev_empty = 0
    if max(dens) < (1 << 61) and max_gen <= 60:
        import numpy as np

        rem = np.array(nums, dtype=np.int64)
        den = np.array(dens, dtype=np.int64)
        idx = np.zeros(len(nums), dtype=np.int64)
        for j in range(1, max_gen + 1):
            rem = rem << 1
            bit = rem >= den
            idx = (idx << 1) + bit
            rem = rem - den * bit
            nonempty = 1 + int(np.count_nonzero(idx[1:] != idx[:-1]))
            empty = (1 << j) - nonempty
            c = empty - 2 * prev_empty
            if c:
                counts[j] = c
            prev_empty = empty
    else:
        rems = list(nums)
        idxs = [0] * len(nums)
        for j in range(1, max_gen + 1):
            for i in range(len(rems)):
                r = rems[i] * 2
                if r >= dens[i]:
                    idxs[i] = idxs[i] * 2 + 1
                    rems[i] = r - dens[i]
                else:
                    idxs[i] = idxs[i] * 2
                    rems[i] = r
            nonempty = 1 + sum(1 for a, b in zip(idxs, idxs[1:]) if a != b)
            empty = (1 << j) - nonempty
            c = empty - 2 * prev_empty
            if c:
                counts[j] = c
            prev_empty = empty
    return counts


def enumerate_pores(oracle: SetOracle, q0: Cube, max_gen: int) -> PoreFamily:
    """Aggregate the pore cubes of ``q0`` into a generation histogram."""
    counts: dict = {}
    points = None
    if q0.dimension == 1:
        lo, hi = q0.as_interval()
        points = oracle.points_in_window(lo, hi)
    if points is not None:
        if max_gen < 1:
            raise PreconditionError("max_gen must be at least 1")
        if not points:
            raise PreconditionError(
                "window does not meet the set; use the whole-cube fast path"
            )
        counts = _histogram_from_points(points, q0, max_gen)
    else:
        for pore in enumerate_pore_cubes(oracle, q0, max_gen):
            g = pore.generation - q0.generation
            counts[g] = counts.get(g, 0) + 1
    family = PoreFamily(
        root=q0,
        counts=counts,
        max_generation=max_gen,
        tail_mass=Fraction(0),
        tail_is_pore_mass=oracle.is_measure_zero(),
    )
    tail = q0.measure - family.enumerated_mass
    if tail < 0:
        raise AssertionError("pore mass exceeded the window measure")
    return PoreFamily(q0, counts, max_gen, tail, oracle.is_measure_zero())


def maximal_pore_length(family: PoreFamily) -> Fraction:
    return family.maximal_pore_length()


def _scan_largest(family: PoreFamily, target: Fraction) -> LengthAnswer:
    cum = Fraction(0)
    for gen in sorted(family.counts):
        cum += family.mass_of(gen)
        if cum >= target:
            return LengthAnswer.exactly(family.length_of(gen))
    # Threshold not reached among enumerated lengths.
    if family.tail_is_pore_mass:
        raise InsufficientDepthError(
            "largest-side threshold falls below the enumerated resolution",
            tail_mass=family.tail_mass,
        )
    if cum + family.tail_mass >= target:
        return LengthAnswer.between(
            Fraction(0), family.length_of(family.max_generation)
        )
    raise PreconditionError("fraction threshold exceeds the total pore mass")


def _scan_smallest(family: PoreFamily, target: Fraction) -> LengthAnswer:
    gens = sorted(family.counts, reverse=True)  # smallest length first

    def crossing(initial: Fraction) -> Fraction | None:
        cum = initial
        if cum >= target:
            return Fraction(-1)  # crossing already inside the tail
        for gen in gens:
            cum += family.mass_of(gen)
            if cum >= target:
                return family.length_of(gen)
        return None

    if family.tail_is_pore_mass:
        # All tail mass eventually materializes as pores strictly below the
        # enumerated resolution, so cumulative masses at enumerated lengths
        # are exact.
        if family.tail_mass >= target:
            raise InsufficientDepthError(
                "smallest-side threshold is met inside the unresolved tail",
                tail_mass=family.tail_mass,
            )
        hit = crossing(family.tail_mass)
        if hit is None:
            raise PreconditionError("fraction threshold exceeds the total pore mass")
        return LengthAnswer.exactly(hit)

    # Tail mass may or may not be pore mass: bracket the crossing.
    optimistic = crossing(family.tail_mass)
    pessimistic = crossing(Fraction(0))
    if optimistic is None:
        raise PreconditionError("fraction threshold exceeds the total pore mass")
    if optimistic == Fraction(-1):
        optimistic = Fraction(0)  # may lie below the resolution
    if pessimistic is None:
        raise InsufficientDepthError(
            "smallest-side threshold cannot be certified at this depth",
            tail_mass=family.tail_mass,
        )
    if optimistic == pessimistic:
        return LengthAnswer.exactly(pessimistic)
    return LengthAnswer.between(optimistic, pessimistic)


def fraction_length(family: PoreFamily, query: FractionQuery) -> LengthAnswer:
    """Extremal side length at which one side of the histogram reaches mass t.

    Largest side: the greatest length L with mass{l >= L} >= t|Q0|.
    Smallest side: the least length L with mass{l <= L} >= t|Q0|.
    """
    total = family.root.measure
    target = query.t * total
    if family.tail_mass >= min(query.t, 1 - query.t) * total:
        raise InsufficientDepthError(
            "unresolved tail mass straddles the requested threshold",
            tail_mass=family.tail_mass,
        )
    if query.side is Side.LARGEST:
        answer = _scan_largest(family, target)
    else:
        answer = _scan_smallest(family, target)
    if answer.exact:
        _assert_threshold_bounds(family, query, answer.value)
    return answer


def _assert_threshold_bounds(family, query, value):
    # mass{l >= L(t)} >= t|Q0| and mass{l < L(t)} <= (1-t)|Q0|, and the duals.
    total = family.root.measure
    at_least = sum(
        (family.mass_of(g) for g in family.counts if family.length_of(g) >= value),
        Fraction(0),
    )
    at_most = sum(
        (family.mass_of(g) for g in family.counts if family.length_of(g) <= value),
        Fraction(0),
    )
    if family.tail_is_pore_mass:
        at_most += family.tail_mass
    if query.side is Side.LARGEST:
        assert at_least >= query.t * total
        assert total - at_least <= (1 - query.t) * total
    else:
        assert at_most >= query.t * total
        assert total - at_most <= (1 - query.t) * total


def eq13_constant(t: Fraction, t_prime: Fraction) -> Fraction:
    """Comparison constant between component and dyadic smallest-side lengths.

    For t' < t the dyadic length at t dominates 2**-k times the component
    length at t', where k is minimal with t' + 2**-(k-2) < t (at most two
    dyadic pores of each size fit inside one gap component).
    """
    t, t_prime = Fraction(t), Fraction(t_prime)
    if not 0 < t_prime < t < 1:
        raise PreconditionError("needs 0 < t' < t < 1")
    k = 0
    while t_prime + Fraction(4, 1 << k) >= t:
        k += 1
    return Fraction(1, 1 << k)


def tilde_fraction_length(
    components: list[Component], window, query: FractionQuery
) -> LengthAnswer:
    """Same thresholds computed over gap-component lengths instead of pores."""
    if not components:
        raise PreconditionError("empty component list")
    if isinstance(window, Cube):
        lo, hi = window.as_interval()
    else:
        lo, hi = Fraction(window[0]), Fraction(window[1])
    total = hi - lo
    target = query.t * total
    masses: dict = {}
    for comp in components:
        masses[comp.length] = masses.get(comp.length, Fraction(0)) + comp.length
    lengths = sorted(masses, reverse=(query.side is Side.LARGEST))
    cum = Fraction(0)
    for L in lengths:
        cum += masses[L]
        if cum >= target:
            return LengthAnswer.exactly(L)
    raise PreconditionError("fraction threshold exceeds the total component mass")


@dataclass(frozen=True)
class RatioRow:
    cube_id: str
    s: Fraction
    largest: LengthAnswer | None
    smallest: LengthAnswer | None
    depth_ok: bool
    note: str = ""

    @property
    def ratio(self) -> Fraction | None:
        if (
            self.largest is not None
            and self.smallest is not None
            and self.largest.exact
            and self.smallest.exact
        ):
            return self.largest.value / self.smallest.value
        return None


@dataclass
class RatioReport:
    s: Fraction
    rows: list = field(default_factory=list)

    @property
    def max_ratio(self) -> Fraction | None:
        ratios = [r.ratio for r in self.rows if r.ratio is not None]
        return max(ratios) if ratios else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["cube_id", "s", "L_s", "S_s", "ratio", "depth_ok"])
        for row in self.rows:
            writer.writerow(
                [
                    row.cube_id,
                    format_rational(row.s),
                    format_rational(row.largest.value) if row.largest and row.largest.exact else "",
                    format_rational(row.smallest.value) if row.smallest and row.smallest.exact else "",
                    format_rational(row.ratio) if row.ratio is not None else "",
                    "true" if row.depth_ok else "false",
                ]
            )
        return buf.getvalue()


def ratio_condition(
    oracle: SetOracle, cubes: list[Cube], s: Fraction, max_gen: int = 40
) -> RatioReport:
    """Per-cube largest/smallest fraction lengths at threshold s and their ratio.

    The maximal ratio over the supplied cubes is the fitted uniform constant.
    Cubes disjoint from the set are skipped with a note.  Values of s at or
    above 1/(1+2**n) are allowed for exploration but draw a warning, since
    the single-threshold characterization needs s below that bound.
    """
    s = Fraction(s)
    if not 0 < s < 1:
        raise PreconditionError("s must lie in (0, 1)")
    report = RatioReport(s=s)
    for i, cube in enumerate(cubes):
        if s >= Fraction(1, 1 + 2**cube.dimension):
            warnings.warn(
                "s is at or above 1/(1+2^n); ratios are exploratory only",
                stacklevel=2,
            )
        cube_id = f"{i}:{cube}"
        if not oracle.meets_cube(cube):
            report.rows.append(
                RatioRow(cube_id, s, None, None, False, "disjoint from set; skipped")
            )
            continue
        family = enumerate_pores(oracle, cube, max_gen)
        try:
            big = fraction_length(family, FractionQuery(s, Side.LARGEST))
            small = fraction_length(family, FractionQuery(s, Side.SMALLEST))
            depth_ok = big.exact and small.exact
            report.rows.append(RatioRow(cube_id, s, big, small, depth_ok))
        except InsufficientDepthError as err:
            report.rows.append(
                RatioRow(cube_id, s, None, None, False, f"insufficient depth: {err}")
            )
    return report


@dataclass(frozen=True)
class PorosityResult:
    holds: bool
    achieved_mass: Fraction
    threshold_length: Fraction | None
    maximal_length: Fraction | None


def weak_porosity_check(
    oracle: SetOracle,
    q0: Cube,
    porosity_sigma: Fraction,
    gamma: Fraction,
    max_gen: int = 40,
) -> PorosityResult:
    """Mass of pores at least gamma times the maximal pore length, against sigma|Q0|.

    Windows disjoint from the set pass trivially (the whole window counts).
    """
    porosity_sigma = Fraction(porosity_sigma)
    gamma = Fraction(gamma)
    if not (0 < porosity_sigma < 1 and 0 < gamma < 1):
        raise PreconditionError("sigma and gamma must lie in (0, 1)")
    if not oracle.meets_cube(q0):
        return PorosityResult(True, q0.measure, None, None)
    family = enumerate_pores(oracle, q0, max_gen)
    if not family.counts:
        raise InsufficientDepthError(
            "no pores found at this depth", tail_mass=family.tail_mass
        )
    max_len = family.maximal_pore_length()
    threshold = gamma * max_len
    if threshold <= family.length_of(family.max_generation) and family.tail_mass > 0:
        raise InsufficientDepthError(
            "gamma threshold reaches below the enumerated resolution",
            tail_mass=family.tail_mass,
        )
    achieved = sum(
        (
            family.mass_of(g)
            for g in family.counts
            if family.length_of(g) >= threshold
        ),
        Fraction(0),
    )
    return PorosityResult(
        achieved >= porosity_sigma * q0.measure, achieved, threshold, max_len
    )
