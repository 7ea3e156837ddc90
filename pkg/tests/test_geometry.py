import numpy as np
import pytest

from carosegd.errors import CrossingContours, InvalidArgument, OutOfRange
from carosegd.geometry import (
    AnnotationSet,
    Contour,
    annotation_contours,
    median_axis,
    pchip_eval,
    pchip_interpolate,
    polyfit_cubic,
    rasterize_below,
    rasterize_between,
    read_annotation_csv,
    shared_span,
)


# ------------------------------------------------------------------- contour


def test_contour_span_inclusive():
    c = Contour(10, np.array([1.0, 2.0, 3.0]))
    assert c.x_end == 12
    assert len(c) == 3
    assert c.y(11) == 2.0


def test_contour_lookup_out_of_span():
    c = Contour(0, np.array([1.0, 2.0]))
    with pytest.raises(OutOfRange):
        c.y(2)


def test_contour_shift_and_scale():
    c = Contour(5, np.array([2.0, 4.0]))
    assert c.shifted(3).x_start == 8
    np.testing.assert_array_equal(c.scaled_rows(0.5).ordinates, [1.0, 2.0])


def test_contour_restricted():
    c = Contour(0, np.arange(10, dtype=np.float64))
    r = c.restricted(3, 6)
    assert r.x_start == 3 and r.x_end == 6
    np.testing.assert_array_equal(r.ordinates, [3, 4, 5, 6])
    with pytest.raises(OutOfRange):
        c.restricted(5, 12)


def test_contour_rejects_nonfinite():
    with pytest.raises(InvalidArgument):
        Contour(0, np.array([1.0, np.inf]))


def test_shared_span():
    a = Contour(0, np.zeros(10))
    b = Contour(5, np.zeros(10))
    assert shared_span(a, b) == (5, 9)
    with pytest.raises(InvalidArgument):
        shared_span(a, Contour(50, np.zeros(3)))


# --------------------------------------------------------------------- pchip
#
# Reference interpolant written out long-hand from the Fritsch-Carlson
# construction: secants, harmonic-mean interior slopes, shape-limited
# three-point end slopes, then a scalar Hermite evaluation per query.


def fc_reference(xs, ys, q):
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    n = len(xs)
    h = [xs[i + 1] - xs[i] for i in range(n - 1)]
    d = [(ys[i + 1] - ys[i]) / h[i] for i in range(n - 1)]
    m = [0.0] * n
    if n == 2:
        m[0] = m[1] = d[0]
    else:
        for i in range(1, n - 1):
            if d[i - 1] == 0.0 or d[i] == 0.0 or (d[i - 1] > 0) != (d[i] > 0):
                m[i] = 0.0
            else:
                w1 = 2.0 * h[i] + h[i - 1]
                w2 = h[i] + 2.0 * h[i - 1]
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i])

        def end_slope(h0, h1, d0, d1):
            s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
            if s == 0.0 or d0 == 0.0 or (s > 0) != (d0 > 0):
                return 0.0
            if (d0 > 0) != (d1 > 0) and abs(s) > 3.0 * abs(d0):
                return 3.0 * d0
            return s

        m[0] = end_slope(h[0], h[1], d[0], d[1])
        m[-1] = end_slope(h[-1], h[-2], d[-1], d[-2])

    out = []
    for v in np.atleast_1d(q):
        v = float(v)
        i = n - 2
        for k in range(n - 1):
            if v <= xs[k + 1]:
                i = k
                break
        t = (v - xs[i]) / h[i]
        a = ys[i]
        b = m[i]
        # expand the Hermite basis into a plain cubic in t
        c = (3.0 * d[i] - 2.0 * m[i] - m[i + 1])
        e = (m[i] + m[i + 1] - 2.0 * d[i])
        out.append(a + h[i] * t * (b + t * (c + t * e)))
    return np.array(out)


def random_monotone(rng, n=None):
    n = n or int(rng.integers(3, 12))
    xs = np.cumsum(rng.uniform(0.5, 4.0, size=n))
    ys = np.cumsum(rng.uniform(0.0, 3.0, size=n))
    return xs, ys


def test_pchip_two_points_is_linear():
    assert pchip_eval([(0, 0), (10, 10)], [5.0])[0] == pytest.approx(5.0, abs=1e-12)


def test_pchip_knot_exactness():
    rng = np.random.default_rng(13)
    for _ in range(30):
        xs, ys = random_monotone(rng)
        got = pchip_eval(np.column_stack([xs, ys]), xs)
        np.testing.assert_allclose(got, ys, atol=1e-12)


def test_pchip_monotone_fixture():
    pts = [(0, 0), (1, 1), (2, 1.05), (3, 4)]
    q = np.linspace(0, 3, 100)
    vals = pchip_eval(pts, q)
    assert np.all(np.diff(vals) >= -1e-12)


def test_pchip_preserves_monotonicity_randomized():
    rng = np.random.default_rng(17)
    for _ in range(50):
        xs, ys = random_monotone(rng)
        q = np.linspace(xs[0], xs[-1], 200)
        vals = pchip_eval(np.column_stack([xs, ys]), q)
        assert np.all(np.diff(vals) >= -1e-9)


def test_pchip_matches_reference_construction():
    rng = np.random.default_rng(19)
    for _ in range(40):
        xs, ys = random_monotone(rng)
        q = rng.uniform(xs[0], xs[-1], size=50)
        got = pchip_eval(np.column_stack([xs, ys]), q)
        want = fc_reference(xs, ys, q)
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_pchip_no_overshoot_per_interval():
    rng = np.random.default_rng(23)
    for _ in range(30):
        xs, ys = random_monotone(rng)
        for i in range(len(xs) - 1):
            q = np.linspace(xs[i], xs[i + 1], 50)
            vals = pchip_eval(np.column_stack([xs, ys]), q)
            lo, hi = min(ys[i], ys[i + 1]), max(ys[i], ys[i + 1])
            assert vals.min() >= lo - 1e-9
            assert vals.max() <= hi + 1e-9


def test_pchip_derivative_continuity_at_knots():
    rng = np.random.default_rng(29)
    eps = 1e-6
    for _ in range(20):
        xs, ys = random_monotone(rng, n=6)
        pts = np.column_stack([xs, ys])
        for xk in xs[1:-1]:
            left = (pchip_eval(pts, [xk]) - pchip_eval(pts, [xk - eps])) / eps
            right = (pchip_eval(pts, [xk + eps]) - pchip_eval(pts, [xk])) / eps
            scale = max(abs(left[0]), abs(right[0]), 1.0)
            assert abs(left[0] - right[0]) / scale < 1e-3


def test_pchip_rejects_duplicate_x():
    with pytest.raises(InvalidArgument):
        pchip_eval([(0, 0), (0, 1), (2, 2)], [0.5])


def test_pchip_rejects_extrapolation():
    with pytest.raises(OutOfRange):
        pchip_eval([(0, 0), (10, 10)], [10.5])


def test_pchip_interpolate_integer_grid():
    c = pchip_interpolate([(2, 1.0), (8, 4.0)], np.arange(2, 9))
    assert c.x_start == 2 and c.x_end == 8
    assert c.y(2) == pytest.approx(1.0)
    assert c.y(8) == pytest.approx(4.0)


# --------------------------------------------------------------- median axis


def test_median_axis_midpoint():
    li = Contour(0, np.full(5, 100.0))
    ma = Contour(0, np.full(5, 200.0))
    np.testing.assert_array_equal(median_axis(li, ma).ordinates, np.full(5, 150.0))


def test_median_axis_symmetric():
    rng = np.random.default_rng(31)
    li = Contour(3, rng.uniform(50, 90, size=20))
    ma = Contour(0, rng.uniform(100, 150, size=30))
    ax1 = median_axis(li, ma)
    ax2 = median_axis(ma, li)
    assert ax1.x_start == ax2.x_start == 3
    np.testing.assert_array_equal(ax1.ordinates, ax2.ordinates)


def test_median_axis_equidistant():
    rng = np.random.default_rng(37)
    li = Contour(0, rng.uniform(10, 40, size=25))
    ma = Contour(0, rng.uniform(60, 90, size=25))
    ax = median_axis(li, ma)
    d1 = ax.ordinates - li.ordinates
    d2 = ma.ordinates - ax.ordinates
    np.testing.assert_allclose(d1, d2, atol=1e-12)


# -------------------------------------------------------------- rasterization


def test_rasterize_below_saturations():
    shape = (4, 3)
    all_ones = rasterize_below(Contour(0, np.full(3, -0.5)), shape)
    assert all_ones.sum() == 12
    all_zero = rasterize_below(Contour(0, np.full(3, 3.5)), shape)
    assert all_zero.sum() == 0


def test_rasterize_below_flat_axis():
    mask = rasterize_below(Contour(0, np.full(3, 2.0)), (5, 3))
    # strictly below: rows 3 and 4 only, row 2 sits on the axis
    np.testing.assert_array_equal(mask.sum(axis=1), [0, 0, 0, 3, 3])


def test_rasterize_below_column_monotone():
    rng = np.random.default_rng(41)
    for _ in range(10):
        ys = rng.uniform(-1, 16, size=8)
        mask = rasterize_below(Contour(0, ys), (16, 8))
        for c in range(8):
            col = mask[:, c]
            # once set, stays set downward
            first = np.argmax(col) if col.any() else 16
            np.testing.assert_array_equal(col[first:], 1)


def test_rasterize_below_requires_full_span():
    with pytest.raises(InvalidArgument):
        rasterize_below(Contour(1, np.zeros(3)), (4, 5))


def test_rasterize_below_rejects_far_ordinates():
    with pytest.raises(InvalidArgument):
        rasterize_below(Contour(0, np.full(3, 99.0)), (4, 3))


def test_rasterize_between_single_column_fixture():
    li = Contour(0, np.array([1.2]))
    ma = Contour(0, np.array([3.7]))
    mask = rasterize_between(li, ma, (6, 1))
    np.testing.assert_array_equal(mask[:, 0], [0, 0, 1, 1, 0, 0])


def test_rasterize_between_inclusive_edges():
    li = Contour(0, np.array([2.0]))
    ma = Contour(0, np.array([4.0]))
    mask = rasterize_between(li, ma, (6, 1))
    np.testing.assert_array_equal(mask[:, 0], [0, 0, 1, 1, 1, 0])


def test_rasterize_between_crossing_reports_first_column():
    li = Contour(0, np.array([1.0, 5.0, 6.0]))
    ma = Contour(0, np.array([4.0, 4.0, 4.0]))
    with pytest.raises(CrossingContours) as err:
        rasterize_between(li, ma, (8, 3))
    assert err.value.column == 1
    assert "column 1" in str(err.value)


def test_rasterize_between_outside_band_is_zero():
    li = Contour(2, np.array([1.0, 1.0]))
    ma = Contour(2, np.array([2.0, 2.0]))
    mask = rasterize_between(li, ma, (4, 6))
    assert mask[:, :2].sum() == 0
    assert mask[:, 4:].sum() == 0
    assert mask[:, 2:4].sum() == 4


def test_upper_boundary_of_band_is_ceil():
    from carosegd.fusion import upper_boundary

    rng = np.random.default_rng(43)
    li = Contour(0, rng.uniform(1.0, 5.0, size=12))
    ma = Contour(0, li.ordinates + rng.uniform(1.5, 4.0, size=12))
    mask = rasterize_between(li, ma, (12, 12))
    up = upper_boundary(mask)
    np.testing.assert_array_equal(up.ordinates, np.ceil(li.ordinates))


# ----------------------------------------------------------------- cubic fit


def test_polyfit_recovers_cubic():
    x = np.arange(40, dtype=np.float64)
    y = 2.0 * x**3 - x + 0.5
    fit = polyfit_cubic(Contour(0, y))
    np.testing.assert_allclose(fit.ordinates, y, rtol=1e-9, atol=1e-9)


def test_polyfit_constant():
    fit = polyfit_cubic(Contour(0, np.full(10, 7.0)))
    np.testing.assert_allclose(fit.ordinates, 7.0, atol=1e-10)


def test_polyfit_residual_orthogonality():
    rng = np.random.default_rng(47)
    for _ in range(10):
        n = int(rng.integers(8, 60))
        y = rng.uniform(0, 300, size=n)
        c = Contour(0, y)
        fit = polyfit_cubic(c)
        r = y - fit.ordinates
        u = np.linspace(-1.0, 1.0, n)
        for k in range(4):
            assert abs(np.dot(r, u**k)) / n <= 1e-8


def test_polyfit_idempotent():
    rng = np.random.default_rng(53)
    y = rng.uniform(0, 100, size=30)
    once = polyfit_cubic(Contour(0, y))
    twice = polyfit_cubic(once)
    np.testing.assert_allclose(twice.ordinates, once.ordinates, atol=1e-9)


def test_polyfit_eval_span_extension():
    x = np.arange(10, 30, dtype=np.float64)
    y = 0.01 * x**3 - x + 2.0
    fit = polyfit_cubic(Contour(10, y), eval_span=(0, 39))
    assert fit.x_start == 0 and fit.x_end == 39
    xe = np.arange(0, 40, dtype=np.float64)
    np.testing.assert_allclose(fit.ordinates, 0.01 * xe**3 - xe + 2.0, atol=1e-8)


def test_polyfit_needs_four_points():
    with pytest.raises(InvalidArgument):
        polyfit_cubic(Contour(0, np.array([1.0, 2.0, 3.0])))


# --------------------------------------------------------------- annotations


def test_annotation_set_validation():
    with pytest.raises(InvalidArgument):
        AnnotationSet(li_points=((0, 1),), ma_points=((0, 2), (5, 2)), expert_id="A1")
    with pytest.raises(InvalidArgument):
        AnnotationSet(
            li_points=((0, 1), (0, 2)), ma_points=((0, 2), (5, 2)), expert_id="A1"
        )


def test_annotation_csv_round_trip(tmp_path):
    p = tmp_path / "img-01_A2.csv"
    p.write_text(
        "# traced control points\n"
        "LI,10,40.5\nLI,50,42.0\nLI,90,41.0\n"
        "MA,10,55.0\nMA,52,56.5\nMA,90,57.0\n"
    )
    ann = read_annotation_csv(p)
    assert ann.expert_id == "A2"
    assert ann.li_points[0] == (10.0, 40.5)
    li, ma = annotation_contours(ann)
    assert li.x_start == 10 and li.x_end == 90
    assert ma.x_start == 10 and ma.x_end == 90
    # interpolant passes through the traced points
    assert li.y(50) == pytest.approx(42.0)
    assert ma.y(52) == pytest.approx(56.5)


def test_annotation_csv_rejects_bad_rows(tmp_path):
    p = tmp_path / "img_A1.csv"
    p.write_text("LI,10\n")
    with pytest.raises(InvalidArgument):
        read_annotation_csv(p)
    p.write_text("LI,a,b\n")
    with pytest.raises(InvalidArgument):
        read_annotation_csv(p)
    p.write_text("XX,1,2\n")
    with pytest.raises(InvalidArgument):
        read_annotation_csv(p)
