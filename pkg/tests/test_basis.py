import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlwgal.basis import (
    DegenerateTensionError,
    cosh_minus_one,
    eval_piece,
    knot_value,
    make_basis,
    make_mesh,
    piece_eval,
    sinh_minus,
    ycosh_minus_sinh,
)

# representative tensions/spacings: the paper's near-cubic regime plus
# moderate and strong tension
GRID = [(0.01262, 0.125), (1.0, 0.3), (5.0, 0.4)]

# frozen extended-precision values (mpmath, 50 digits)
ALPHA1_SMALL = 0.24999996889367593  # alpha1 at p=0.01262, h=0.125


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class TestStableHelpers:
    # mpmath oracle values frozen at dps=40
    CASES_SINHM = [
        (1e-05, 1.6666666666833333e-16),
        (0.0015775, 6.542528136437773e-10),
        (0.3, 4.5202934471426869e-03),
        (2.0, 1.6268604078470190e+00),
    ]
    CASES_YCMS = [
        (1e-05, 3.3333333333666667e-16),
        (0.0015775, 1.3085056749424737e-09),
        (0.3, 9.0713422162371093e-03),
        (2.0, 3.8973717402248839e+00),
    ]

    @pytest.mark.parametrize("y,want", CASES_SINHM)
    def test_sinh_minus(self, y, want):
        assert rel(sinh_minus(y), want) < 1e-14

    @pytest.mark.parametrize("y,want", CASES_YCMS)
    def test_ycosh_minus_sinh(self, y, want):
        assert rel(ycosh_minus_sinh(y), want) < 1e-14

    def test_odd_and_vectorized(self):
        y = np.array([-0.3, -1e-4, 0.0, 1e-4, 0.3])
        np.testing.assert_allclose(sinh_minus(y), -sinh_minus(-y), rtol=1e-15)
        np.testing.assert_allclose(ycosh_minus_sinh(y), -ycosh_minus_sinh(-y),
                                   rtol=1e-15)
        assert cosh_minus_one(0.0) == 0.0


class TestCoefficients:
    def test_matches_raw_closed_forms(self):
        # the stored coefficients use algebraically simplified expressions;
        # check them against the verbatim forms at a tension where the raw
        # arithmetic is well conditioned
        p, h = 1.0, 0.3
        b = make_basis(p, h)
        y = p * h
        s, c = np.sinh(y), np.cosh(y)
        D = y * c - s
        assert rel(b.b2, p / (2 * D)) < 1e-13
        assert rel(b.a1, y * c / D) < 1e-13
        assert rel(b.b1, (p / 2) * (c * (c - 1) + s * s) / (D * (1 - c))) < 1e-13
        e = np.exp(y)
        assert rel(b.c1, 0.25 * ((1 - c) / e + s * (1 / e - 1)) / (D * (1 - c))) < 1e-13
        assert rel(b.d1, 0.25 * (e * (c - 1) + s * (e - 1)) / (D * (1 - c))) < 1e-13
        assert rel(b.alpha1, (s - y) / (2 * D)) < 1e-13
        assert rel(b.alpha2, p * (1 - c) / (2 * D)) < 1e-13
        assert rel(b.alpha3, p * p * s / (2 * D)) < 1e-13

    def test_small_tension_alpha1(self):
        b = make_basis(0.01262, 0.125)
        assert abs(b.alpha1 - ALPHA1_SMALL) < 1e-15
        assert abs(b.alpha1 - 0.25) < 1e-6

    def test_cubic_limit(self):
        b = make_basis(1e-4, 0.3)
        assert abs(b.alpha1 - 0.25) < 1e-6

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            make_basis(-1.0, 0.1)
        with pytest.raises(ValueError):
            make_basis(0.0, 0.1)
        with pytest.raises(ValueError):
            make_basis(1.0, 0.0)

    def test_degenerate_tension(self):
        with pytest.raises(DegenerateTensionError):
            make_basis(1e-7, 0.1)


class TestKnotValues:
    @pytest.mark.parametrize("p,h", GRID)
    def test_table_of_knot_values(self, p, h):
        b = make_basis(p, h)
        assert knot_value(b, 0, 0) == 1.0
        assert knot_value(b, -1, 0) == b.alpha1
        assert knot_value(b, 1, 0) == b.alpha1
        assert knot_value(b, 0, 1) == 0.0
        # signs follow the piecewise definition: B rises left of center
        assert knot_value(b, -1, 1) == -b.alpha2
        assert knot_value(b, 1, 1) == b.alpha2
        assert knot_value(b, 0, 2) == -2.0 * b.alpha3
        assert knot_value(b, -1, 2) == b.alpha3
        assert knot_value(b, 1, 2) == b.alpha3
        for d in (0, 1, 2):
            assert knot_value(b, -2, d) == 0.0
            assert knot_value(b, 2, d) == 0.0

    @pytest.mark.parametrize("p,h", GRID)
    def test_consistency_with_eval(self, p, h):
        b = make_basis(p, h)
        for off in (-2, -1, 0, 1, 2):
            for d in (0, 1, 2):
                got = eval_piece(b, 0, off * h, d)
                want = knot_value(b, off, d)
                assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_argument_validation(self):
        b = make_basis(1.0, 0.3)
        with pytest.raises(ValueError):
            knot_value(b, 3, 0)
        with pytest.raises(ValueError):
            knot_value(b, 0, 3)
        with pytest.raises(ValueError):
            eval_piece(b, 0, 0.1, deriv=5)

    def test_partition_sum_at_knot(self):
        # the three basis functions alive at an interior knot sum to 1 + 2*alpha1
        for p, h in GRID:
            b = make_basis(p, h)
            total = sum(eval_piece(b, i, 5 * h, 0) for i in (4, 5, 6))
            assert abs(total - (1.0 + 2.0 * b.alpha1)) < 1e-12


class TestPieces:
    @pytest.mark.parametrize("p,h", GRID)
    def test_junction_continuity(self, p, h):
        b = make_basis(p, h)
        junctions = [(-h, 0, 1), (0.0, 1, 2), (h, 2, 3)]
        for t, left, right in junctions:
            for d in (0, 1, 2):
                l = piece_eval(b, left, t, d)
                r = piece_eval(b, right, t, d)
                assert abs(l - r) <= 1e-10 * max(abs(l), abs(r), 1e-12)

    def test_outside_support(self):
        b = make_basis(1.0, 0.3)
        for d in (0, 1, 2):
            assert eval_piece(b, 0, 3 * b.h, d) == 0.0
            assert eval_piece(b, 0, -2 * b.h, d) == 0.0
            assert eval_piece(b, 7, 7 * b.h + 2 * b.h, d) == 0.0

    def test_spec_knot_example(self):
        # value at the first right neighbour equals (s - ph)/(2(phc - s))
        p, h = 1.0, 0.3
        b = make_basis(p, h)
        y = p * h
        want = (np.sinh(y) - y) / (2 * (y * np.cosh(y) - np.sinh(y)))
        assert rel(eval_piece(b, 0, h, 0), want) < 1e-13

    @settings(max_examples=200, deadline=None)
    @given(
        p=st.floats(0.01, 5.0),
        h=st.floats(0.05, 0.5),
        frac=st.floats(0.0, 1.0),
    )
    def test_symmetry(self, p, h, frac):
        b = make_basis(p, h)
        t = frac * 2.0 * h
        plus = eval_piece(b, 0, t, 0)
        minus = eval_piece(b, 0, -t, 0)
        assert abs(plus - minus) <= 1e-12 * max(abs(plus), 1e-12)
        dplus = eval_piece(b, 0, t, 1)
        dminus = eval_piece(b, 0, -t, 1)
        assert abs(dplus + dminus) <= 1e-10 * max(abs(dplus), 1e-9)

    @settings(max_examples=100, deadline=None)
    @given(p=st.floats(0.01, 5.0), h=st.floats(0.05, 0.5),
           i=st.integers(-1, 10), frac=st.floats(-2.2, 2.2))
    def test_shifted_center(self, p, h, i, frac):
        # B_i(x) is B_0 translated by i*h
        b = make_basis(p, h)
        t = frac * h
        assert eval_piece(b, i, i * h + t, 0) == pytest.approx(
            eval_piece(b, 0, t, 0), abs=1e-14, rel=1e-12)


class TestMesh:
    def test_uniform_knots(self):
        m = make_mesh(-40.0, 60.0, 800)
        assert m.h == 0.125
        assert m.knots[0] == -40.0
        assert abs(m.knots[-1] - 60.0) <= 1e-12 * 100.0
        i = np.arange(801)
        np.testing.assert_array_equal(m.knots, -40.0 + 0.125 * i)

    def test_too_few_elements(self):
        with pytest.raises(ValueError):
            make_mesh(0.0, 1.0, 3)

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            make_mesh(1.0, 1.0, 10)
