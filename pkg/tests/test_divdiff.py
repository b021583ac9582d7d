import math
from fractions import Fraction

import numpy as np
import pytest

from opcalc import (
    Contour,
    Disc,
    HoloFunction,
    bang_shriek,
    compositions,
    dd_contour,
    dd_explicit,
    dd_hermite,
    dd_power,
    dd_recursive,
    dd_resolvent,
    dd_series_eval,
    exp_function,
    multinomial_identity,
    power_function,
    resolvent_function,
    simplex_moment_s,
    simplex_moment_t,
)
from opcalc.divdiff import circle_around
from opcalc.errors import (
    CoincidentNodes,
    ContourTooTight,
    ContourViolation,
    DomainViolation,
    PoleAtNode,
    SeriesDiverging,
    ZeroNodeNegativePower,
)

EXP = exp_function()


def disc_nodes(rng, count, radius=0.8, min_gap=0.05):
    while True:
        pts = radius * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
        gaps = np.abs(pts[:, None] - pts[None, :])[np.triu_indices(count, 1)]
        if gaps.size == 0 or gaps.min() > min_gap:
            return pts


class TestRecursive:
    def test_square_two_nodes(self):
        # (f(1) - f(2)) / (1 - 2) = 3 for f = z^2
        assert dd_recursive(power_function(2), [1.0, 2.0]) == pytest.approx(3.0)

    def test_constant_vanishes(self):
        f = HoloFunction(lambda z: np.full(np.shape(z), 2.5 + 0j))
        assert dd_recursive(f, [0.0, 1.0, 2.0]) == pytest.approx(0.0, abs=1e-14)

    def test_matches_power_closed_form(self):
        rng = np.random.default_rng(0)
        xs = disc_nodes(rng, 3) + 1.2
        assert dd_recursive(power_function(5), xs) == pytest.approx(
            dd_power(xs, 5), rel=1e-10
        )

    def test_coincident_rejected(self):
        with pytest.raises(CoincidentNodes):
            dd_recursive(EXP, [0.5, 0.5 + 1e-12])


class TestExplicit:
    def test_square_two_nodes(self):
        assert dd_explicit(power_function(2), [1.0, 2.0]) == pytest.approx(3.0)

    def test_permutation_symmetry(self):
        rng = np.random.default_rng(1)
        xs = disc_nodes(rng, 4)
        base = dd_explicit(EXP, xs)
        for perm in ([2, 0, 3, 1], [3, 2, 1, 0]):
            assert dd_explicit(EXP, xs[perm]) == pytest.approx(base, rel=1e-12)

    def test_recursive_agreement(self):
        val_r = dd_recursive(EXP, [0.0, 1.0, 2.0])
        val_e = dd_explicit(EXP, [0.0, 1.0, 2.0])
        assert abs(val_r - val_e) <= 1e-12 * abs(val_e)

    def test_recursive_permutation_stability(self):
        rng = np.random.default_rng(2)
        xs = disc_nodes(rng, 4)
        base = dd_recursive(EXP, xs)
        assert dd_recursive(EXP, xs[::-1]) == pytest.approx(base, rel=1e-10)


class TestContour:
    def test_confluent_derivative(self):
        # first divided difference at a doubled node is the derivative
        assert dd_contour(EXP, [0.0, 0.0]) == pytest.approx(1.0, rel=1e-11)

    def test_cube_at_123(self):
        # monomial sum of degree 1 over three nodes: 1 + 2 + 3
        assert dd_contour(power_function(3), [1.0, 2.0, 3.0]) == pytest.approx(6.0, rel=1e-11)

    def test_explicit_agreement(self):
        xs = [0.1, 0.7, 1.3]
        assert dd_contour(EXP, xs) == pytest.approx(dd_explicit(EXP, xs), rel=1e-10)

    def test_too_tight(self):
        # one node grazes the integration circle at a quadrature angle
        with pytest.raises(ContourTooTight):
            dd_contour(EXP, [0.0, 1.0 - 1e-9], Contour(0.0, 1.0, 16))

    def test_node_outside(self):
        with pytest.raises(ContourViolation):
            dd_contour(EXP, [0.0, 3.0], Contour(0.0, 1.0, 16))

    def test_domain_guard(self):
        f = resolvent_function(1.5)  # disc domain of radius 1.425
        with pytest.raises(ContourViolation):
            dd_contour(f, [0.0, 1.3])  # auto circle pokes out of the disc

    def test_refinement_monotone(self):
        rng = np.random.default_rng(3)
        xs = disc_nodes(rng, 3)
        exact = dd_explicit(EXP, xs)
        center, radius = circle_around(xs)
        errs = [
            abs(dd_contour(EXP, xs, Contour(center, radius, m), refine=False) - exact)
            for m in (16, 32, 64, 128, 256)
        ]
        floor = 1e-13 * max(abs(exact), 1.0)
        for e0, e1 in zip(errs, errs[1:]):
            assert e1 <= e0 or e1 <= floor
        assert errs[-1] <= floor


class TestHermite:
    def test_confluent_all_zero(self):
        for n in (1, 2, 3):
            got = dd_hermite(EXP, [0.0] * (n + 1))
            assert got == pytest.approx(1.0 / math.factorial(n), rel=1e-9)

    def test_square_two_nodes(self):
        assert dd_hermite(power_function(2), [1.0, 2.0]) == pytest.approx(3.0, rel=1e-11)

    def test_recursive_agreement(self):
        xs = [0.0, 0.5, 1.0]
        assert dd_hermite(EXP, xs) == pytest.approx(dd_recursive(EXP, xs), rel=1e-9)

    def test_domain_violation(self):
        f = HoloFunction(np.exp, Disc(0.0, 1.0), deriv=lambda k, z: np.exp(z))
        with pytest.raises(DomainViolation):
            dd_hermite(f, [0.0, 1.5])

    def test_synthesized_derivatives(self):
        # no derivative handle: Cauchy-circle synthesis on a disc domain
        f = HoloFunction(np.exp, Disc(0.0, 4.0))
        xs = [0.1, 0.4, 0.8]
        assert dd_hermite(f, xs) == pytest.approx(dd_recursive(EXP, xs), rel=1e-8)


class TestPowerClosedForm:
    def test_frozen_values(self):
        assert dd_power([1.0, 2.0], 2) == pytest.approx(3.0)
        assert dd_power([1.0, 2.0, 3.0], 1) == 0.0
        assert dd_power([1.0, 2.0], -1) == pytest.approx(-0.5)

    def test_leading_coefficient(self):
        rng = np.random.default_rng(4)
        for n in (1, 2, 3, 4):
            xs = disc_nodes(rng, n + 1)
            assert dd_power(xs, n) == pytest.approx(1.0, rel=1e-12)

    def test_zero_node_negative(self):
        with pytest.raises(ZeroNodeNegativePower):
            dd_power([0.0, 1.0], -2)

    def test_recursion_sweep(self):
        rng = np.random.default_rng(5)
        for n in (0, 1, 2, 3):
            xs = disc_nodes(rng, n + 1) + 1.5
            for N in range(-3, 9):
                closed = dd_power(xs, N)
                via_rec = dd_recursive(power_function(N), xs)
                assert abs(closed - via_rec) <= 1e-10 * max(abs(closed), 1.0)


class TestResolvent:
    def test_frozen(self):
        assert dd_resolvent([0.0, 1.0], 3.0) == pytest.approx(1.0 / 6.0)

    def test_single_node(self):
        assert dd_resolvent([0.5], 2.0) == pytest.approx(1.0 / 1.5)

    def test_pole(self):
        with pytest.raises(PoleAtNode):
            dd_resolvent([0.0, 1.0], 1.0)

    def test_recursive_agreement(self):
        rng = np.random.default_rng(6)
        xs = disc_nodes(rng, 3)
        lam = 3.0
        got = dd_resolvent(xs, lam)
        want = dd_recursive(resolvent_function(lam), xs)
        assert abs(got - want) <= 1e-12 * abs(want)


class TestSimplexMoments:
    def test_frozen_s(self):
        assert simplex_moment_s((0, 0, 0)) == pytest.approx(0.5)
        assert simplex_moment_s((1, 0)) == pytest.approx(0.5)
        assert simplex_moment_s((1, 1, 1), exact=True) == Fraction(1, 120)

    def test_frozen_t(self):
        assert simplex_moment_t((1,)) == pytest.approx(0.5)
        assert simplex_moment_t((0, 0)) == pytest.approx(0.5)
        assert simplex_moment_t((1, 2), exact=True) == Fraction(1, 15)

    def test_s_exactness(self):
        for n in range(1, 5):
            for total in range(7):
                for alpha in compositions(total, n + 1):
                    val = simplex_moment_s(alpha, exact=True)
                    fact = 1
                    for part in alpha:
                        fact *= math.factorial(part)
                    assert val * math.factorial(total + n) == fact

    def test_t_two_expressions_agree(self):
        # product of tail partial sums vs (|a|+n+1) a! / a?! with a = (a0, a');
        # the value cannot depend on the padding entry a0
        for a0 in (0, 2, 5):
            for aprime in [(1,), (2, 1), (1, 2), (0, 3), (2, 0, 1)]:
                n = len(aprime)
                alpha = (a0,) + aprime
                fact = 1
                for part in alpha:
                    fact *= math.factorial(part)
                stated = Fraction((sum(alpha) + n + 1) * fact, int(bang_shriek(alpha)[1]))
                assert simplex_moment_t(aprime, exact=True) == stated

    def test_quadrature_agrees_with_closed_form(self):
        # independent oracle: integrate monomials with the simplex rule itself
        from opcalc.quadrature import simplex_rule

        s, w = simplex_rule(3, 12)
        for alpha in [(0, 0, 0, 0), (1, 0, 2, 0), (2, 1, 1, 1)]:
            quad = float(np.sum(w * np.prod(s ** np.asarray(alpha), axis=1)))
            assert quad == pytest.approx(simplex_moment_s(alpha), rel=1e-12)
        t = np.cumsum(s[:, :0:-1], axis=1)[:, ::-1]  # t_j = s_j + ... + s_n
        for alpha in [(1, 0, 0), (1, 2, 0), (2, 1, 1)]:
            quad = float(np.sum(w * np.prod(t ** np.asarray(alpha), axis=1)))
            assert quad == pytest.approx(simplex_moment_t(alpha), rel=1e-12)


class TestBangShriek:
    def test_empty(self):
        assert bang_shriek(()) == (1.0, 1.0)

    def test_frozen_pair(self):
        assert bang_shriek((1, 2)) == (20.0, 30.0)

    def test_single_part_symmetric(self):
        # one part: both products collapse to k! * (k + 1)
        for k in (0, 1, 2, 3, 5):
            expected = float(math.factorial(k) * (k + 1))
            assert bang_shriek((k,)) == (expected, expected)

    def test_reversal_swaps(self):
        alpha = (2, 0, 3)
        fwd, bwd = bang_shriek(alpha)
        rfwd, rbwd = bang_shriek(alpha[::-1])
        assert (fwd, bwd) == (rbwd, rfwd)


class TestSeriesEval:
    def test_origin_confluent(self):
        assert dd_series_eval(EXP, "origin", 0.0, [0.0, 0.0]) == pytest.approx(1.0)

    def test_origin_matches_recursive(self):
        xs = [0.0, 0.05, 0.1]
        got = dd_series_eval(EXP, "origin", 0.0, xs, order_cap=25)
        assert got == pytest.approx(dd_recursive(EXP, xs), rel=1e-10)

    def test_offset_matches_recursive(self):
        got = dd_series_eval(EXP, "offset", 0.0, [0.05, 0.1], order_cap=25)
        assert got == pytest.approx(dd_recursive(EXP, [0.0, 0.05, 0.1]), rel=1e-10)

    def test_cumulative_matches_recursive(self):
        a, x = 0.3, [0.1, 0.2]
        got = dd_series_eval(EXP, "cumulative", a, x, order_cap=25)
        want = dd_recursive(EXP, [0.3, 0.4, 0.6])
        assert got == pytest.approx(want, rel=1e-10)

    def test_offset_confluent_matches_contour(self):
        h = 0.05
        got = dd_series_eval(EXP, "offset", 0.0, [h, h], order_cap=25)
        want = dd_contour(EXP, [0.0, h, h])
        assert got == pytest.approx(want, rel=1e-9)

    def test_diverging(self):
        f = resolvent_function(1.0, domain=Disc(0.0, 0.9))
        with pytest.raises(SeriesDiverging):
            dd_series_eval(f, "offset", 0.0, [2.0, 2.0], order_cap=30)

    def test_tail_estimate_reported(self):
        val, tail = dd_series_eval(EXP, "offset", 0.0, [0.1, 0.1], order_cap=4,
                                   full_output=True)
        assert tail > 0
        better = dd_series_eval(EXP, "offset", 0.0, [0.1, 0.1], order_cap=25)
        assert abs(val - better) <= 10 * tail


class TestMultinomial:
    def test_frozen(self):
        assert multinomial_identity((0,), 2, "<=") == (3, 3)
        assert multinomial_identity((1,), 3, "<=") == (6, 6)
        assert multinomial_identity((1, 0), 2, "=") == (3, 3)

    def test_exhaustive(self):
        for n in range(1, 5):
            for btot in range(5):
                for beta in compositions(btot, n):
                    for m in range(btot, 9):
                        for mode in ("<=", "="):
                            brute, closed = multinomial_identity(beta, m, mode)
                            assert brute == closed


class TestNearCoincidence:
    def test_integral_routes_stay_consistent(self):
        # just above the coincidence gate the recursion loses digits by
        # design; the two integral routes must still agree with each other
        h = 1e-5
        xs = [0.3, 0.3 + h, 0.9]
        via_contour = dd_contour(EXP, xs)
        via_simplex = dd_hermite(EXP, xs)
        assert abs(via_contour - via_simplex) <= 1e-8 * abs(via_contour)
        # and with the exactly confluent limit
        limit = dd_contour(EXP, [0.3, 0.3, 0.9])
        assert abs(via_contour - limit) <= 1e-4 * abs(limit)


class TestFourWay:
    @pytest.mark.parametrize("fname", ["exp", "pow5", "res3"])
    def test_agreement(self, fname):
        f = {"exp": EXP, "pow5": power_function(5), "res3": resolvent_function(3.0)}[fname]
        rng = np.random.default_rng(hash(fname) % 2**32)
        for n in (1, 2, 3, 4):
            xs = disc_nodes(rng, n + 1)
            vals = [
                dd_recursive(f, xs),
                dd_explicit(f, xs),
                dd_contour(f, xs),
                dd_hermite(f, xs),
            ]
            scale = max(max(abs(v) for v in vals), 1e-300)
            spread = max(abs(v - w) for v in vals for w in vals)
            assert spread / scale <= 1e-8
