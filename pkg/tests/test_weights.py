import math
from fractions import Fraction

import pytest

from poremetrics.dyadic import Cube
from poremetrics.errors import InsufficientDepthError, PreconditionError
from poremetrics.setmodels import (
    Component,
    ContractionSequence,
    FinitePoints,
    Generated,
    IntegerLattice,
    PointCloud,
)
from poremetrics.weights import (
    ApQuery,
    a1_quotient,
    ap_product,
    component_integral,
    dilate,
    dual_exponent,
    eq3_constants,
    exponent_transfer,
    mean_dist_power,
)
from poremetrics.pores import enumerate_pores

UNIT = Cube.interval(0, 1)
Z = IntegerLattice()
ORIGIN = FinitePoints((Fraction(0),))


class TestComponentIntegral:
    # Frozen by hand from the antiderivative u^(theta+1)/(theta+1):
    # an uncut gap of length h contributes 2 (h/2)^(theta+1) / (theta+1).

    def test_measure(self):
        assert component_integral(Component(0, 1), 0) == 1

    def test_inverse_sqrt(self):
        val = component_integral(Component(0, 1), Fraction(-1, 2))
        assert math.isclose(val, 2 * math.sqrt(2), rel_tol=1e-14)

    def test_linear(self):
        assert component_integral(Component(0, Fraction(1, 2)), 1) == Fraction(1, 16)

    def test_divergent_rejected(self):
        with pytest.raises(PreconditionError):
            component_integral(Component(0, 1), -1)

    def test_clipped_profile(self):
        # distance profile min(1 + x, 2 - x) on [0, 1]: crossover at 1/2,
        # integral = 2 F(3/2) - F(1) - F(1) with F(u) = u^2/2.
        val = component_integral(Component(0, 1), 1, d_left=1, d_right=1)
        assert val == Fraction(9, 4) - Fraction(1, 2) - Fraction(1, 2)

    def test_one_sided_ramp(self):
        # d_left far: the right ramp governs: integral of (2 - x) ... wait,
        # profile min(5 + x, 1 + (1 - x)) = 2 - x on [0, 1].
        val = component_integral(Component(0, 1), 1, d_left=5, d_right=1)
        assert val == Fraction(3, 2)


class TestMeanDistPower:
    def test_origin_inverse_sqrt(self):
        mv = mean_dist_power(ORIGIN, UNIT, Fraction(-1, 2))
        assert mv.exact and mv.lo == 2

    def test_origin_sqrt(self):
        mv = mean_dist_power(ORIGIN, UNIT, Fraction(1, 2))
        assert mv.exact and mv.lo == Fraction(2, 3)

    def test_lattice_normalization(self):
        mv = mean_dist_power(Z, UNIT, 0)
        assert mv.exact and mv.lo == 1

    def test_lattice_inverse_sqrt_closed_form(self):
        # 2 * int_0^(1/2) x^(-1/2) dx = 2 sqrt(2)
        mv = mean_dist_power(Z, UNIT, Fraction(-1, 2))
        assert not mv.exact
        assert mv.lo <= 2 * math.sqrt(2) <= mv.hi
        assert mv.hi - mv.lo < 1e-9

    def test_eq3_sandwich_analytic(self):
        # E = {0} on [0, 1): the dyadic sum is geometric with ratio 2^-(theta+1).
        for theta in (Fraction(-1, 2), Fraction(1, 2), Fraction(2)):
            c1, c2 = eq3_constants(1, theta)
            ratio = Fraction(1, 2) ** (theta + 1) if theta.denominator == 1 else None
            full_sum = (
                float(ratio / (1 - ratio))
                if ratio is not None
                else (2.0 ** -float(theta + 1)) / (1 - 2.0 ** -float(theta + 1))
            )
            mean = mean_dist_power(ORIGIN, UNIT, theta)
            mid = float(mean.lo)
            assert c1 * full_sum <= mid * (1 + 1e-12)
            assert mid <= c2 * full_sum * (1 + 1e-12)

    def test_eq3_lower_half_on_truncated_sums(self):
        import random

        theta = Fraction(-1, 2)
        c1, _ = eq3_constants(1, theta)
        rng = random.Random(7)
        cases = [
            ((Fraction(0), Fraction(1, 3), Fraction(1)), UNIT),
            ((Fraction(1, 7),), Cube.interval(0, Fraction(1, 2))),
        ]
        while len(cases) < 14:
            den = rng.choice([2, 3, 5, 8, 16])
            pts = tuple(sorted({Fraction(rng.randint(-2 * den, 2 * den), den) for _ in range(rng.randint(1, 5))}))
            lo = Fraction(rng.randint(-8, 8), 4)
            window = Cube.interval(lo, lo + Fraction(2) ** rng.randint(-2, 2))
            if FinitePoints(pts).meets_interval(*window.as_interval()):
                cases.append((pts, window))
        for pts, window in cases:
            oracle = FinitePoints(pts)
            fam = enumerate_pores(oracle, window, 40)
            partial = sum(
                float(length) ** float(theta) * float(mass) / float(window.measure)
                for _, length, _, mass in fam.entries()
            )
            mean = mean_dist_power(oracle, window, theta)
            assert c1 * partial <= float(mean.hi) * (1 + 1e-12)

    def test_divergent_mean_reports_growing_lower_bound(self):
        prev = None
        for depth in (5, 10, 20, 40):
            mv = mean_dist_power(ORIGIN, UNIT, Fraction(-3, 2), max_gen=depth)
            assert mv.hi == math.inf
            assert prev is None or mv.lo > prev
            prev = mv.lo

    def test_divergent_on_touching_pore(self):
        # E = {0, 1}: every pore accumulates toward both endpoints, and the
        # pore [1/2, 1) touches 1, so even the truncated integral is infinite.
        oracle = FinitePoints((0, 1))
        mv = mean_dist_power(oracle, UNIT, Fraction(-3, 2), max_gen=10)
        assert mv.lo == math.inf and mv.hi == math.inf

    def test_two_dimensional_bracket(self):
        cloud = PointCloud(((Fraction(0), Fraction(0)),))
        square = Cube.root((0, 0), 1)
        theta = Fraction(1)
        mv = mean_dist_power(cloud, square, theta, max_gen=12)
        # Midpoint-grid reference for the mean of |x| over the unit square.
        n = 128
        acc = 0.0
        for i in range(n):
            for j in range(n):
                x = (i + 0.5) / n
                y = (j + 0.5) / n
                acc += math.hypot(x, y)
        ref = acc / n**2
        assert mv.lo <= ref <= mv.hi

    def test_two_dimensional_negative_theta_refused(self):
        cloud = PointCloud(((Fraction(0), Fraction(0)),))
        square = Cube.root((0, 0), 1)
        with pytest.raises(InsufficientDepthError):
            mean_dist_power(cloud, square, Fraction(-1, 2), max_gen=10)

    def test_positive_measure_set_contributions(self):
        # E = [0, 1/4]: dist vanishes on a quarter of the window, so the
        # zeroth power still averages to one, positive powers integrate only
        # over the gap, and negative powers diverge.
        from poremetrics.setmodels import BoxUnion

        boxes = BoxUnion((((Fraction(0),), (Fraction(1, 4),)),))
        assert mean_dist_power(boxes, UNIT, 0).lo == 1
        linear = mean_dist_power(boxes, UNIT, 1)
        # Gap (1/4, 1) with distances 0 and 3/4 beyond: profile x - 1/4.
        assert linear.exact and linear.lo == Fraction(9, 32)
        inv = mean_dist_power(boxes, UNIT, Fraction(-1, 2))
        assert inv.hi == math.inf and inv.lo > 0


class TestApProduct:
    def test_origin_four_thirds_exact(self):
        res = ap_product(ORIGIN, UNIT, ApQuery(Fraction(1, 2), 2))
        assert res.case == "III"
        assert res.product.exact and res.product.lo == Fraction(4, 3)

    def test_dilation_invariance_exact(self):
        for k in range(-20, 21):
            cube = Cube.interval(0, Fraction(2) ** k)
            res = ap_product(ORIGIN, cube, ApQuery(Fraction(1, 2), 2))
            assert res.product.exact and res.product.lo == Fraction(4, 3)

    def test_case_one_short_circuit(self):
        res = ap_product(ORIGIN, Cube.interval(5, 6), ApQuery(Fraction(1, 2), 2))
        assert res.case == "I"
        assert res.product.lo == 1
        assert res.product.hi == 2  # 4^(1/2), exact because the root is rational

    def test_case_two_consistency(self):
        # A disjoint cube at small gap is controlled by its 4-fold dilation:
        # product(Q0) <= 4^(n p) product(4 Q0).
        q0 = Cube.interval(Fraction(9, 8), Fraction(5, 4))
        res_small = ap_product(Z, q0, ApQuery(Fraction(1, 2), 2))
        assert res_small.case == "II"
        res_big = ap_product(Z, dilate(q0, 4), ApQuery(Fraction(1, 2), 2))
        assert res_big.case == "III"
        assert float(res_small.product.lo) <= 16 * float(res_big.product.hi)

    def test_monotone_in_p(self):
        # For q > p the product with the transferred weight cannot grow.
        for cube in (UNIT, Cube.interval(0, 4)):
            prev = None
            for p in (Fraction(3, 2), 2, 3, 5):
                res = ap_product(Z, cube, ApQuery(Fraction(1, 2), p))
                val = float(res.product.hi)
                if prev is not None:
                    assert val <= prev * (1 + 1e-9)
                prev = val

    def test_holder_floor(self):
        g = Generated(ContractionSequence.half_harmonic(), 6)
        for m in range(7):
            window = Cube.interval(0, g.points[3**m])
            res = ap_product(g, window, ApQuery(Fraction(1, 3), 2), max_gen=25)
            assert res.product.hi >= 1

    def test_divergent_alpha_grows_in_depth_and_not_in_scale(self):
        q = ApQuery(Fraction(3, 2), 2)
        sups = []
        for depth in (5, 10, 15):
            vals = [
                ap_product(ORIGIN, Cube.interval(0, Fraction(1, 2**k)), q, max_gen=depth).product.lo
                for k in range(1, 11)
            ]
            assert max(vals) / min(vals) < 1 + 1e-9  # scale invariance
            sups.append(max(vals))
        assert sups[0] < sups[1] < sups[2]

    def test_p_one_rejected(self):
        with pytest.raises(PreconditionError):
            ap_product(ORIGIN, UNIT, ApQuery(Fraction(1, 2), 1))

    def test_two_sided_sweep_bounded_vs_divergent(self):
        # Cubes [-2^k, 2^j) around the origin: the alpha = 1/2 product stays
        # bounded over the whole sweep; for alpha = 3/2 the symmetric cubes
        # (where 0 is a grid point, so a pore closure touches the set) report
        # an exactly infinite product, and on the rest the certified lower
        # bound grows with depth.
        cubes = {
            (k, j): Cube.interval(-(Fraction(2) ** k), Fraction(2) ** j)
            for k in range(-3, 4)
            for j in range(-3, 4)
        }
        sup_half = max(
            float(ap_product(ORIGIN, c, ApQuery(Fraction(1, 2), 2), max_gen=40).product.hi)
            for c in cubes.values()
        )
        assert sup_half < 4
        for (k, j), cube in cubes.items():
            lo10 = ap_product(ORIGIN, cube, ApQuery(Fraction(3, 2), 2), max_gen=10).product.lo
            lo25 = ap_product(ORIGIN, cube, ApQuery(Fraction(3, 2), 2), max_gen=25).product.lo
            if k == j:
                assert lo10 == math.inf and lo25 == math.inf
            else:
                assert lo10 < lo25 < math.inf


class TestA1Quotient:
    def test_lattice_value(self):
        # Closed form: mean = 2 sqrt(2), ess-inf of dist^(-1/2) is sqrt(2)
        # at the gap midpoint, so the quotient is exactly 2.
        mv = a1_quotient(Z, UNIT, Fraction(1, 2))
        assert mv.lo <= 2 <= mv.hi
        assert mv.hi - mv.lo < 1e-9

    def test_origin_value(self):
        mv = a1_quotient(ORIGIN, UNIT, Fraction(1, 2))
        assert mv.exact and mv.lo == 2

    def test_origin_dilation_invariance(self):
        for k in range(-20, 21):
            mv = a1_quotient(ORIGIN, Cube.interval(0, Fraction(2) ** k), Fraction(1, 2))
            assert mv.exact and mv.lo == 2

    def test_alpha_must_be_positive(self):
        with pytest.raises(PreconditionError):
            a1_quotient(Z, UNIT, Fraction(-1, 2))


class TestExponentTransfer:
    def test_raising_index_keeps_exponent(self):
        assert exponent_transfer(-1, 2, 3) == -1

    def test_lowering_index_rescales(self):
        assert exponent_transfer(-1, 3, 2) == Fraction(-1, 2)

    def test_duality(self):
        assert dual_exponent(-1, 2) == 1
        assert dual_exponent(Fraction(-1, 2), 3) == Fraction(1, 4)

    def test_sign_preserved(self):
        for theta in (Fraction(-2), Fraction(3, 7)):
            for p, q in ((2, 5), (5, 2), (Fraction(3, 2), Fraction(7, 3))):
                out = exponent_transfer(theta, p, q)
                assert (out > 0) == (theta > 0)
