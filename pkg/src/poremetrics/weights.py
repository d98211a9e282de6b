"""Mean values of dist(.,E)^theta over cubes and the Muckenhoupt products built from them.

One-dimensional evaluations are exact closed forms over gap components: the
distance profile inside a gap is the minimum of two linear ramps, so each
piece integrates to a difference of antiderivatives F(u) = u^(theta+1)/(theta+1).
Higher dimensions fall back to the two-sided comparability between the mean
and the dyadic pore sum, with explicitly computed constants.

Exponent bookkeeping keeps the window side length symbolic, so products in
which the side's powers cancel (the A_p product, the A_1 quotient) come out
exact whenever the normalized integrals are rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import Cube
from .errors import InsufficientDepthError, PreconditionError
from .pores import enumerate_pore_cubes, enumerate_pores
from .rationals import power_value, rational_pow, sqrt_bracket
from .setmodels import SetOracle

_BASE_SLACK = 1e-15


@dataclass(frozen=True)
class ApQuery:
    """Exponent alpha (weight dist^-alpha) and integrability index p."""

    alpha: Fraction
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "p", Fraction(self.p))
        if self.p < 1:
            raise PreconditionError("p must be at least 1")


@dataclass(frozen=True)
class MeanValue:
    """A sound bracket [lo, hi]; exact means lo == hi as a Fraction."""

    lo: Fraction | float
    hi: Fraction | float
    exact: bool

    @classmethod
    def exactly(cls, v) -> "MeanValue":
        return cls(v, v, True)

    @property
    def value(self):
        return self.lo if self.exact else (self.lo + self.hi) / 2

    @property
    def diverged(self) -> bool:
        return self.hi == math.inf


def _pow_any(v, e: Fraction):
    """(value, is_exact) for v**e over nonnegative v of either numeric kind."""
    if isinstance(v, Fraction):
        if v == 0 and e < 0:
            return math.inf, True
        r = rational_pow(v, e)
        if r is not None:
            return r, True
        return float(v) ** float(e), False
    if v == math.inf:
        return (math.inf if e > 0 else 0.0), True
    if v == 0.0 and e < 0:
        return math.inf, True
    return float(v) ** float(e), False


def _widen(lo, hi, n_terms):
    slack = _BASE_SLACK * max(8, n_terms)
    lo_f = float(lo)
    hi_f = float(hi)
    if lo_f != math.inf:
        lo_f = lo_f - abs(lo_f) * slack
    if hi_f != math.inf:
        hi_f = hi_f + abs(hi_f) * slack
    return lo_f, hi_f


def _assemble(lo, hi, exact, n_terms) -> MeanValue:
    if exact and isinstance(lo, Fraction) and isinstance(hi, Fraction) and lo == hi:
        return MeanValue(lo, lo, True)
    lo_f, hi_f = _widen(lo, hi, n_terms)
    return MeanValue(lo_f, hi_f, False)


def _antiderivative(u, theta: Fraction):
    """(F(u), exact) with F(u) = u^(theta+1)/(theta+1), or log for theta = -1."""
    if theta == -1:
        if u == 0:
            return -math.inf, False
        return math.log(float(u)), False
    e = theta + 1
    val, exact = _pow_any(u, e)
    if exact and isinstance(val, Fraction):
        return val / e, True
    return float(val) / float(e), False


def profile_integral(h: Fraction, d_left: Fraction, d_right: Fraction, theta: Fraction):
    """Integral of min(d_left + (x-a), d_right + (b-x))^theta over [a, b], b-a = h.

    Returns (value, exact); the value is math.inf when theta <= -1 and the
    profile touches zero at an endpoint.
    """
    h, d_left, d_right = Fraction(h), Fraction(d_left), Fraction(d_right)
    theta = Fraction(theta)
    if h <= 0:
        raise PreconditionError("profile needs h > 0")
    if theta <= -1 and min(d_left, d_right) == 0:
        return math.inf, False
    if d_left - d_right > h:
        # Right ramp governs throughout.
        hi_v, e1 = _antiderivative(d_right + h, theta)
        lo_v, e2 = _antiderivative(d_right, theta)
    elif d_right - d_left > h:
        hi_v, e1 = _antiderivative(d_left + h, theta)
        lo_v, e2 = _antiderivative(d_left, theta)
    else:
        peak = (h + d_left + d_right) / 2
        m_v, e0 = _antiderivative(peak, theta)
        a_v, e1 = _antiderivative(d_left, theta)
        b_v, e2 = _antiderivative(d_right, theta)
        if e0 and e1 and e2:
            return 2 * m_v - a_v - b_v, True
        return 2 * float(m_v) - float(a_v) - float(b_v), False
    if e1 and e2:
        return hi_v - lo_v, True
    return float(hi_v) - float(lo_v), False


def profile_peak(h: Fraction, d_left: Fraction, d_right: Fraction) -> Fraction:
    """Maximum of the two-ramp distance profile over the component."""
    if abs(d_left - d_right) <= h:
        return (h + d_left + d_right) / 2
    return min(d_left, d_right) + h


def component_integral(component, theta: Fraction, d_left=Fraction(0), d_right=Fraction(0)):
    """Exact integral of dist^theta over one gap component.

    Endpoints inside the set carry distance 0; window-clipped endpoints must
    supply their true distances to the set.
    """
    theta = Fraction(theta)
    if theta <= -1:
        raise PreconditionError("divergent integral: theta must exceed -1")
    value, _ = profile_integral(component.length, d_left, d_right, theta)
    return value


@dataclass(frozen=True)
class _ScaledMean:
    """Normalized mean: the cube mean of dist^theta equals side**theta * norm."""

    side: Fraction
    theta: Fraction
    lo_norm: Fraction | float
    hi_norm: Fraction | float
    exact: bool
    n_terms: int

    def to_mean_value(self) -> MeanValue:
        scale, scale_exact = _pow_any(self.side, self.theta)
        if self.exact and scale_exact and isinstance(scale, Fraction):
            v = scale * self.lo_norm
            return MeanValue(v, v, True)
        lo = float(scale) * float(self.lo_norm)
        hi = float(scale) * float(self.hi_norm) if self.hi_norm != math.inf else math.inf
        return _assemble(lo, hi, False, self.n_terms + 2)


def _scaled_mean_1d(oracle: SetOracle, q0: Cube, theta: Fraction, max_gen: int) -> _ScaledMean:
    lo_w, hi_w = q0.as_interval()
    side = hi_w - lo_w
    meets = oracle.meets_interval(lo_w, hi_w)
    if theta <= -1 and meets:
        return _divergent_partial_1d(oracle, q0, theta, max_gen)
    comps = oracle.components(lo_w, hi_w)
    covered = sum((c.length for c in comps), Fraction(0))
    total = Fraction(0)
    total_f = 0.0
    exact = True
    for comp in comps:
        d_l = oracle.distance(comp.left)
        d_r = oracle.distance(comp.right)
        val, is_exact = profile_integral(
            comp.length / side, d_l / side, d_r / side, theta
        )
        if val == math.inf:
            return _ScaledMean(side, theta, math.inf, math.inf, False, len(comps))
        if is_exact and exact:
            total += val
        else:
            if exact:
                total_f = float(total)
                exact = False
            total_f += float(val)
    # Distance vanishes on the part of the window inside the set: it adds
    # nothing for theta > 0, exactly its normalized measure for theta = 0,
    # and diverges for theta < 0.
    if covered < side:
        inside = (side - covered) / side
        if theta == 0:
            total += inside
        elif theta < 0:
            lo_norm = total if exact else total_f
            return _ScaledMean(side, theta, lo_norm, math.inf, False, len(comps) + 1)
    if exact:
        return _ScaledMean(side, theta, total, total, True, len(comps))
    return _ScaledMean(side, theta, total_f, total_f, False, len(comps))


def _divergent_partial_1d(oracle, q0, theta, max_gen) -> _ScaledMean:
    """theta <= -1 on a window meeting the set: the mean diverges; report the
    exact integral over the pores enumerated so far as a growing lower bound."""
    lo_w, hi_w = q0.as_interval()
    side = hi_w - lo_w
    total = Fraction(0)
    total_f = 0.0
    exact = True
    n = 0
    for pore in enumerate_pore_cubes(oracle, q0, max_gen):
        a, b = pore.as_interval()
        d_a = oracle.distance(a)
        d_b = oracle.distance(b)
        val, is_exact = profile_integral(
            (b - a) / side, d_a / side, d_b / side, theta
        )
        n += 1
        if val == math.inf:
            return _ScaledMean(side, theta, math.inf, math.inf, False, n)
        if is_exact and exact:
            total += val
        else:
            if exact:
                total_f = float(total)
                exact = False
            total_f += float(val)
    lo_norm = total if exact else total_f
    return _ScaledMean(side, theta, lo_norm, math.inf, False, max(n, 1))


def beta_moment(n: int, theta: Fraction) -> Fraction:
    """Exact value of the Beta-type integral of v^theta (1-v)^(n-1) over [0,1]."""
    if theta <= -1:
        raise PreconditionError("divergent boundary integral")
    out = Fraction(0)
    for j in range(n):
        out += Fraction((-1) ** j * math.comb(n - 1, j), 1) / (theta + 1 + j)
    return out


def eq3_constants(n: int, theta: Fraction) -> tuple[float, float]:
    """Sound (C1, C2) with C1 * dyadic sum <= mean <= C2 * dyadic sum.

    One constant comes from the in-pore distance to the pore boundary, the
    other from the diameter of the pore's parent; which is the lower one
    depends on the sign of theta.
    """
    theta = Fraction(theta)
    if theta <= -1:
        raise PreconditionError("theta must exceed -1")
    boundary = n * power_value(Fraction(2), -theta) * beta_moment(n, theta)
    parent_diam, p_exact = _pow_any(Fraction(4 * n), theta / 2)  # (2 sqrt(n))^theta
    b_f, p_f = float(boundary), float(parent_diam)
    slack = 1e-14
    lo = min(b_f, p_f) * (1 - slack)
    hi = max(b_f, p_f) * (1 + slack)
    return lo, hi


def _scaled_mean_nd(oracle, q0, theta, max_gen) -> _ScaledMean:
    n = q0.dimension
    theta = Fraction(theta)
    if not oracle.meets_cube(q0):
        d_lo, d_hi = _cube_distance_bracket(oracle, q0)
        diam_hi = sqrt_bracket(Fraction(n))[1] * q0.side
        far = d_hi + diam_hi
        side = q0.side
        lo_p, _ = _pow_any(d_lo / side if d_lo > 0 else Fraction(0), theta)
        hi_p, _ = _pow_any(far / side, theta)
        lo_v, hi_v = (lo_p, hi_p) if theta >= 0 else (hi_p, lo_p)
        return _ScaledMean(side, theta, lo_v, hi_v, False, 4)
    family = enumerate_pores(oracle, q0, max_gen)
    norm_sum = Fraction(0)
    for g in family.counts:
        norm_sum += family.counts[g] * Fraction(1, 1 << g) ** (theta + n)
    # The normalized dyadic sum uses length ratios, so it is dimensionless.
    c1, c2 = eq3_constants(n, theta)
    if theta < 0:
        raise InsufficientDepthError(
            "no finite-depth upper bound exists for negative powers in n > 1",
            tail_mass=family.tail_mass,
            partial=c1 * float(norm_sum),
        )
    tail_norm = (family.tail_mass / q0.measure) * Fraction(1, 1 << (family.max_generation + 1)) ** theta
    return _ScaledMean(
        q0.side, theta, c1 * float(norm_sum), c2 * float(norm_sum + tail_norm), False, 8
    )


def _cube_distance_bracket(oracle, q0):
    """Bracket of dist(Q0, E) for a cube disjoint from the set."""
    if q0.dimension == 1:
        lo_w, hi_w = q0.as_interval()
        d = min(oracle.distance(lo_w), oracle.distance(hi_w))
        return d, d
    corner_lo = oracle.distance_bracket(q0.lower())
    corner_hi = oracle.distance_bracket(q0.upper())
    lo = max(Fraction(0), min(corner_lo[0], corner_hi[0]) - sqrt_bracket(Fraction(q0.dimension))[1] * q0.side)
    hi = min(corner_lo[1], corner_hi[1])
    return lo, hi


def mean_dist_power(oracle: SetOracle, q0: Cube, theta, max_gen: int = 40) -> MeanValue:
    """Mean of dist(.,E)^theta over the cube, exact in dimension one.

    For theta <= -1 on a window meeting the set, the true mean is infinite;
    the bracket's lower end is the exact integral over the pores enumerated
    to ``max_gen`` and grows without bound as the depth increases.
    """
    theta = Fraction(theta)
    if q0.dimension == 1:
        return _scaled_mean_1d(oracle, q0, theta, max_gen).to_mean_value()
    return _scaled_mean_nd(oracle, q0, theta, max_gen).to_mean_value()


@dataclass(frozen=True)
class ApResult:
    product: MeanValue
    case: str  # "I" far cube, "II" near disjoint cube, "III" cube meeting the set
    neg_mean: MeanValue | None = None
    pos_mean: MeanValue | None = None


def _combine_product(sm1: _ScaledMean, sm2: _ScaledMean, p: Fraction) -> MeanValue:
    """(side^-a m1) * (side^(a/(p-1)) m2)^(p-1): the side powers cancel exactly."""
    e = p - 1
    lo2, lo2_exact = _pow_any(sm2.lo_norm, e)
    hi2, hi2_exact = _pow_any(sm2.hi_norm, e)
    exact = (
        sm1.exact
        and sm2.exact
        and lo2_exact
        and hi2_exact
        and isinstance(sm1.lo_norm, Fraction)
        and isinstance(lo2, Fraction)
    )
    if exact and sm1.lo_norm == sm1.hi_norm and lo2 == hi2:
        return MeanValue.exactly(sm1.lo_norm * lo2)
    lo = float(sm1.lo_norm) * float(lo2)
    hi = math.inf if (sm1.hi_norm == math.inf or hi2 == math.inf) else float(sm1.hi_norm) * float(hi2)
    return _assemble(lo, hi, False, sm1.n_terms + sm2.n_terms)


def ap_product(oracle: SetOracle, q0: Cube, query: ApQuery, max_gen: int = 40) -> ApResult:
    """Bracket of the two-factor Muckenhoupt product for w = dist^-alpha.

    Far cubes (gap at least twice the diameter) short-circuit to the bracket
    [1, 4^alpha].  Elsewhere both mean factors are evaluated and multiplied
    with the window scale cancelled symbolically, so dilation-invariant
    configurations give exactly dilation-invariant products.
    """
    if query.p <= 1:
        raise PreconditionError("ap_product needs p > 1; use a1_quotient for p = 1")
    alpha, p = query.alpha, query.p
    meets = oracle.meets_cube(q0)
    if not meets:
        d_lo, d_hi = _cube_distance_bracket(oracle, q0)
        diam_hi = q0.side if q0.dimension == 1 else sqrt_bracket(Fraction(q0.dimension))[1] * q0.side
        if d_lo >= 2 * diam_hi:
            hi, hi_exact = _pow_any(Fraction(4), alpha)
            if not hi_exact:
                hi = float(hi) * (1 + 1e-14)
            result = ApResult(MeanValue(Fraction(1), hi, False), "I")
            _assert_holder_floor(result.product)
            return result
    if q0.dimension == 1:
        sm1 = _scaled_mean_1d(oracle, q0, -alpha, max_gen)
        sm2 = _scaled_mean_1d(oracle, q0, alpha / (p - 1), max_gen)
    else:
        sm1 = _scaled_mean_nd(oracle, q0, -alpha, max_gen)
        sm2 = _scaled_mean_nd(oracle, q0, alpha / (p - 1), max_gen)
    product = _combine_product(sm1, sm2, p)
    result = ApResult(
        product,
        "III" if meets else "II",
        sm1.to_mean_value(),
        sm2.to_mean_value(),
    )
    _assert_holder_floor(result.product)
    return result


def _assert_holder_floor(product: MeanValue):
    # Jensen: the true product is at least 1, so any sound bracket reaches 1.
    hi = product.hi
    if not (hi == math.inf or hi >= 1 - 1e-11):
        raise AssertionError(f"A_p product bracket upper end {hi} fell below 1")


def a1_quotient(oracle: SetOracle, q0: Cube, alpha, max_gen: int = 40) -> MeanValue:
    """Bracket of (mean of dist^-alpha) / (essential infimum of dist^-alpha).

    The essential infimum comes from the farthest point of the window from
    the set, the peak of the piecewise-linear distance profile.
    """
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise PreconditionError("a1_quotient needs alpha > 0")
    if q0.dimension != 1:
        raise PreconditionError("a1_quotient is implemented for dimension 1")
    lo_w, hi_w = q0.as_interval()
    side = hi_w - lo_w
    comps = oracle.components(lo_w, hi_w)
    if not comps:
        raise PreconditionError("window is covered by the set")
    peak = Fraction(0)
    for comp in comps:
        d_l = oracle.distance(comp.left)
        d_r = oracle.distance(comp.right)
        peak = max(peak, profile_peak(comp.length, d_l, d_r))
    sm = _scaled_mean_1d(oracle, q0, -alpha, max_gen)
    factor, factor_exact = _pow_any(peak / side, alpha)
    if sm.exact and factor_exact and isinstance(factor, Fraction):
        v = sm.lo_norm * factor
        return MeanValue(v, v, True)
    lo = float(sm.lo_norm) * float(factor)
    hi = math.inf if sm.hi_norm == math.inf else float(sm.hi_norm) * float(factor)
    return _assemble(lo, hi, False, sm.n_terms + 2)


def exponent_transfer(theta, p, q) -> Fraction:
    """Move a distance-weight exponent from class index p to index q.

    Raising the index keeps the exponent; lowering it rescales by
    (q-1)/(p-1), preserving the sign.
    """
    theta, p, q = Fraction(theta), Fraction(p), Fraction(q)
    if p < 1 or q <= 1:
        raise PreconditionError("exponent transfer needs p >= 1 and q > 1")
    if q >= p:
        return theta
    return theta * (q - 1) / (p - 1)


def dual_exponent(theta, p) -> Fraction:
    """Exponent of the dual weight w^(1-p') with 1/p + 1/p' = 1."""
    theta, p = Fraction(theta), Fraction(p)
    if p <= 1:
        raise PreconditionError("duality needs p > 1")
    p_prime = p / (p - 1)
    return theta * (1 - p_prime)


def dilate(q0: Cube, factor: int) -> Cube:
    """Concentric cube with the side scaled by an integer factor."""
    if factor < 1:
        raise PreconditionError("factor must be a positive integer")
    side = q0.side
    center = tuple(c + side / 2 for c in q0.lower())
    new_side = side * factor
    origin = tuple(c - new_side / 2 for c in center)
    return Cube.root(origin, new_side)
