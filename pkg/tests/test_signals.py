import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invmmd.errors import GridMismatch, ZeroVariance
from invmmd.signals import (
    DiscretizedSignal,
    Grid,
    ShiftMode,
    l2_dist,
    l2_norm_sq,
    read_signal_csv,
    rotate,
    shift,
    standardize,
    write_signal_csv,
)

P, Z = ShiftMode.PERIODIC_WRAP, ShiftMode.ZERO_PAD


def sig(values, a=0.0, b=1.0):
    return DiscretizedSignal(Grid(a, b, len(values)), np.asarray(values, float))


def periodic_random(rng, p=17, a=0.0, b=2.0):
    v = rng.standard_normal(p)
    v[-1] = v[0]
    return sig(v, a, b)


def test_grid_points_and_validation():
    g = Grid(-1.0, 1.0, 5)
    np.testing.assert_allclose(g.points, [-1, -0.5, 0, 0.5, 1])
    assert g.step == 0.5
    with pytest.raises(ValueError):
        Grid(1.0, 1.0, 4)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        DiscretizedSignal(g, np.zeros(4))
    with pytest.raises(ValueError):
        DiscretizedSignal(g, [0, 1, np.nan, 0, 0])


@pytest.mark.parametrize("values, a, b, expected", [
    ([0.0, 0.0, 0.0], 0.0, 5.0, 0.0),
    ([1.0, 1.0], 0.0, 1.0, 2.0),
    ([0.0, 1.0, 2.0], 0.0, 2.0, 5.0),
])
def test_l2_norm_sq_examples(values, a, b, expected):
    assert l2_norm_sq(sig(values, a, b)) == expected


def test_l2_dist_examples():
    x = sig([1.0, 1.0])
    assert l2_dist(x, x) == 0.0
    assert l2_dist(x, sig([0.0, 0.0])) == pytest.approx(np.sqrt(2.0), abs=1e-15)


def test_l2_dist_matches_elementwise_loop():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = sig(rng.standard_normal(9), -2, 3), sig(rng.standard_normal(9), -2, 3)
        acc = 0.0
        for u, v in zip(x.values, y.values):
            acc += (u - v) * (u - v)
        expected = np.sqrt(acc * 5.0 / 8.0)
        assert l2_dist(x, y) == pytest.approx(expected, rel=1e-12)
        assert l2_dist(x, y) == l2_dist(y, x)


def test_l2_dist_grid_mismatch():
    with pytest.raises(GridMismatch):
        l2_dist(sig([1.0, 2.0]), sig([1.0, 2.0], 0.0, 2.0))


@pytest.mark.parametrize("mode", [P, Z])
def test_zero_shift_is_identity(mode):
    x = sig([0.3, -1.0, 2.0, 0.3])
    np.testing.assert_array_equal(shift(x, 0.0, mode).values, x.values)


def test_full_period_wrap_is_identity():
    x = sig([1.0, 2.0, 3.0, 1.0], 0.0, 3.0)
    np.testing.assert_allclose(shift(x, 3.0, P).values, x.values, atol=1e-12)


def test_one_step_wrap_rotates():
    # seam identified: distinct samples (1, 2, 3) rotate to (3, 1, 2)
    x = sig([1.0, 2.0, 3.0, 1.0], 0.0, 3.0)
    np.testing.assert_allclose(shift(x, 1.0, P).values, [3.0, 1.0, 2.0, 3.0], atol=1e-12)


def test_grid_multiple_wrap_matches_index_rotation():
    rng = np.random.default_rng(2)
    x = periodic_random(rng)
    for r in range(-20, 21):
        expected = np.roll(x.values[:-1], r)
        expected = np.append(expected, expected[0])
        np.testing.assert_allclose(shift(x, r * x.grid.step, P).values, expected, atol=1e-12)
        np.testing.assert_array_equal(rotate(x, r).values, expected)


def test_wrap_interpolates_linearly_between_samples():
    x = sig([0.0, 2.0, 4.0, 0.0], 0.0, 3.0)
    # value at t_k is x(t_k - 0.5); x(-0.5) wraps to the seam segment (4 -> 0)
    np.testing.assert_allclose(shift(x, 0.5, P).values, [2.0, 1.0, 3.0, 2.0])


def test_zero_pad_examples():
    x = sig([1.0, 2.0, 3.0, 4.0], 0.0, 3.0)
    np.testing.assert_allclose(shift(x, 1.0, Z).values, [0.0, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(shift(x, -2.0, Z).values, [3.0, 4.0, 0.0, 0.0])
    np.testing.assert_allclose(shift(x, 0.5, Z).values, [0.0, 1.5, 2.5, 3.5])
    np.testing.assert_allclose(shift(x, 10.0, Z).values, 0.0)


def test_zero_pad_matches_np_interp():
    rng = np.random.default_rng(3)
    x = sig(rng.standard_normal(11), -1.0, 4.0)
    for t in rng.uniform(-6, 6, size=30):
        expected = np.interp(x.grid.points - t, x.grid.points, x.values, left=0.0, right=0.0)
        np.testing.assert_allclose(shift(x, t, Z).values, expected, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(s=st.integers(-40, 40), t=st.integers(-40, 40), seed=st.integers(0, 2**32 - 1))
def test_wrap_composition_on_grid_multiples(s, t, seed):
    x = periodic_random(np.random.default_rng(seed))
    h = x.grid.step
    lhs = shift(shift(x, s * h, P), t * h, P)
    np.testing.assert_allclose(lhs.values, shift(x, (s + t) * h, P).values, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(r=st.integers(-40, 40), seed=st.integers(0, 2**32 - 1))
def test_wrap_preserves_norm_on_grid_multiples(r, seed):
    # the duplicated seam sample moves with the rotation, so compare the
    # p - 1 distinct samples, which are permuted exactly
    x = periodic_random(np.random.default_rng(seed))
    y = shift(x, r * x.grid.step, P)
    assert sorted(y.values[:-1]) == sorted(x.values[:-1])
    seam = x.grid.step * (y.values[0] ** 2 - x.values[0] ** 2)
    assert l2_norm_sq(y) == pytest.approx(l2_norm_sq(x) + seam, rel=1e-13)


def test_triangle_inequality():
    rng = np.random.default_rng(4)
    for _ in range(200):
        x, y, z = (sig(rng.standard_normal(8)) for _ in range(3))
        assert l2_dist(x, z) <= l2_dist(x, y) + l2_dist(y, z) + 1e-9


def test_standardize():
    np.testing.assert_allclose(standardize(sig([0.0, 2.0])).values, [-1.0, 1.0])
    rng = np.random.default_rng(5)
    for _ in range(10):
        out = standardize(sig(3.0 + 7.0 * rng.standard_normal(50))).values
        assert abs(out.mean()) < 1e-12
        assert abs(out.std() - 1.0) < 1e-12
    with pytest.raises(ZeroVariance):
        standardize(sig([0.1, 0.1, 0.1]))


def test_signal_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    grid = Grid(0.0, 2 * np.pi, 7)
    signals = [DiscretizedSignal(grid, rng.standard_normal(7)) for _ in range(3)]
    path = tmp_path / "x.csv"
    write_signal_csv(path, signals)
    assert path.read_text().splitlines()[0].startswith("# grid 0.0 6.28")
    back = read_signal_csv(path)
    assert len(back) == 3 and back[0].grid == grid
    for a, b in zip(signals, back):
        np.testing.assert_array_equal(a.values, b.values)


def test_signal_csv_requires_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3\n")
    with pytest.raises(ValueError, match="grid"):
        read_signal_csv(path)


def test_standardize_periodic_ignores_seam_sample():
    x = sig([5.0, 0.0, 1.0, 5.0])
    out = standardize(x, periodic=True).values
    d = np.array([5.0, 0.0, 1.0])
    np.testing.assert_allclose(out, (np.append(d, 5.0) - d.mean()) / d.std())
    assert out[0] == out[-1]
