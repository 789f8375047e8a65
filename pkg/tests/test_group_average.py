import numpy as np
import pytest

from invmmd.errors import DegenerateSignal, GridMismatch
from invmmd.group_average import (
    AveragedKernelSpec,
    CircularShift,
    GaussianWindow,
    OrbitSamples,
    RealLineShift,
    Unit,
    averaged_gram,
    averaged_kernel_eval,
    build_orbit_samples,
    exact_cyclic_average,
    orbit_weight,
    periodic_spec,
    rho_c_discrete,
    sample_nu_x,
    select_c,
    window_spec,
)
from invmmd.kernels import GaussianKernel, eval_kernel
from invmmd.signals import DiscretizedSignal, Grid, ShiftMode, l2_norm_sq, rotate, shift
from invmmd.errors import AllDegenerate

TWO_PI = 2 * np.pi


def smooth_periodic(rng, p=64, harmonics=3):
    """Random trigonometric polynomial on [0, 2 pi] with matching endpoints."""
    grid = Grid(0.0, TWO_PI, p)
    t = grid.points
    v = np.zeros(p)
    for k in range(1, harmonics + 1):
        v += rng.standard_normal() * np.cos(k * t) / k + rng.standard_normal() * np.sin(k * t) / k
    v[-1] = v[0]
    return DiscretizedSignal(grid, v)


# -- weights -----------------------------------------------------------------

def test_rho_c_examples():
    grid = Grid(-1.0, 1.0, 3)
    assert rho_c_discrete(DiscretizedSignal(grid, np.zeros(3)), 0.7) == 0.0
    # a very wide window reduces to the plain quadrature sum (2/2) * 3
    assert rho_c_discrete(DiscretizedSignal(grid, np.ones(3)), 1e9) == pytest.approx(3.0, rel=1e-12)


def test_rho_c_matches_direct_sum():
    rng = np.random.default_rng(0)
    grid = Grid(-5.0, 5.0, 41)
    x = DiscretizedSignal(grid, rng.standard_normal(41))
    total = 0.0
    for tk, xk in zip(grid.points, x.values):
        total += xk ** 2 * np.exp(-tk ** 2 / 2.0)
    assert rho_c_discrete(x, 1.0) == pytest.approx(total * 10.0 / 40.0, rel=1e-12)


def test_orbit_weight_examples():
    grid = Grid(0.0, 2.0, 3)
    x = DiscretizedSignal(grid, [1.0, 2.0, 0.0])  # (T/(p-1)) * sum x^2 = 5
    assert orbit_weight(x, periodic_spec(1.0, 2.0)) == 1.0
    assert orbit_weight(x, window_spec(1.0, 1.0)) == pytest.approx(np.sqrt(2 * np.pi) * 5.0, rel=1e-12)
    assert orbit_weight(x, window_spec(1.0, 1.0)) == pytest.approx(12.5331, abs=1e-4)
    assert orbit_weight(DiscretizedSignal(grid, np.zeros(3)), window_spec(1.0, 1.0)) == 0.0


def test_weight_identity_with_l2_norm():
    rng = np.random.default_rng(1)
    grid = Grid(-5.0, 5.0, 128)
    for c in (0.1, 0.8, 3.0):
        x = DiscretizedSignal(grid, rng.standard_normal(128))
        assert orbit_weight(x, window_spec(1.0, c)) == pytest.approx(np.sqrt(2 * np.pi) * c * l2_norm_sq(x), rel=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        AveragedKernelSpec(GaussianKernel(1.0), CircularShift(1.0), GaussianWindow(1.0))
    with pytest.raises(ValueError):
        AveragedKernelSpec(GaussianKernel(1.0), RealLineShift(), Unit())
    with pytest.raises(ValueError):
        periodic_spec(1.0, 1.0, S=0)
    with pytest.raises(ValueError):
        window_spec(1.0, 0.0)


# -- sampling ------------------------------------------------------------------

def test_circular_samples_range_and_determinism():
    spec = periodic_spec(1.0, TWO_PI, S=4)
    x = smooth_periodic(np.random.default_rng(2))
    a = sample_nu_x(x, spec, np.random.default_rng(7))
    b = sample_nu_x(x, spec, np.random.default_rng(7))
    assert a.shifts.shape == (4,)
    assert np.all((a.shifts >= 0) & (a.shifts < TWO_PI))
    np.testing.assert_array_equal(a.shifts, b.shifts)
    assert a.weight == 1.0


def test_circular_period_must_match_grid():
    x = smooth_periodic(np.random.default_rng(2))
    with pytest.raises(GridMismatch):
        sample_nu_x(x, periodic_spec(1.0, 1.0), np.random.default_rng(0))


def density_oracle(x, c, tau):
    """Unnormalised rho_c(x(. - tau)) by direct quadrature of the zero-padded shift."""
    return np.array([rho_c_discrete(shift(x, t, ShiftMode.ZERO_PAD), c) for t in tau])


def test_window_samples_single_spike_against_density_oracle():
    grid = Grid(-5.0, 5.0, 101)  # step 0.1, t = 1 is a grid point
    v = np.zeros(101)
    v[60] = 1.0
    x = DiscretizedSignal(grid, v)
    spec = window_spec(1.0, 0.5, S=100_000)
    draws = sample_nu_x(x, spec, np.random.default_rng(3)).shifts
    # moving the spike at t = 1 under the window centre needs tau near -1
    tau = np.linspace(-4.0, 2.0, 6001)
    dens = np.exp(-(1.0 + tau) ** 2 / (2 * 0.25))
    dens /= np.trapezoid(dens, tau)
    mean = np.trapezoid(tau * dens, tau)
    assert mean == pytest.approx(-1.0, abs=1e-6)
    assert draws.mean() == pytest.approx(mean, abs=0.01)
    assert draws.std() == pytest.approx(0.5, abs=0.01)


def test_window_samples_generic_signal_against_density_oracle():
    # zero padding of the shifted signal is exact only while the energy stays
    # inside the window, so keep the signal and c small relative to [-5, 5]
    grid = Grid(-5.0, 5.0, 201)
    t = grid.points
    x = DiscretizedSignal(grid, np.exp(-(t - 0.7) ** 2) * (1 + 0.5 * np.sin(3 * t)))
    c = 0.4
    draws = sample_nu_x(x, window_spec(1.0, c, S=200_000), np.random.default_rng(4)).shifts
    tau = np.linspace(-3.0, 1.6, 2301)
    dens = density_oracle(x, c, tau)
    dens /= np.trapezoid(dens, tau)
    mean = np.trapezoid(tau * dens, tau)
    var = np.trapezoid((tau - mean) ** 2 * dens, tau)
    assert draws.mean() == pytest.approx(mean, abs=0.01)
    assert draws.var() == pytest.approx(var, rel=0.02)
    # the oracle density integrates to the orbit weight, up to the energy
    # lost by linear interpolation at off-grid shifts
    w = np.trapezoid(density_oracle(x, c, tau), tau)
    assert w == pytest.approx(orbit_weight(x, window_spec(1.0, c)), rel=5e-3)


def test_window_sampling_rejects_zero_signal():
    x = DiscretizedSignal(Grid(-1.0, 1.0, 5), np.zeros(5))
    with pytest.raises(DegenerateSignal):
        sample_nu_x(x, window_spec(1.0, 1.0), np.random.default_rng(0))


def test_build_orbit_samples_shape_and_determinism():
    rng = np.random.default_rng(5)
    pool = [smooth_periodic(rng) for _ in range(6)]
    spec = periodic_spec(1.0, TWO_PI, S=8, seed=123)
    a = build_orbit_samples(pool, spec)
    b = build_orbit_samples(pool, spec)
    assert [s.index for s in a] == list(range(6))
    assert all(s.shifts.shape == (8,) for s in a)
    for sa, sb in zip(a, b):
        assert sa.shifts.tobytes() == sb.shifts.tobytes()
    other = build_orbit_samples(pool, periodic_spec(1.0, TWO_PI, S=8, seed=124))
    assert not np.array_equal(a[0].shifts, other[0].shifts)


def test_zero_signal_gets_zero_row():
    grid = Grid(-5.0, 5.0, 32)
    rng = np.random.default_rng(6)
    pool = [DiscretizedSignal(grid, rng.standard_normal(32)) for _ in range(3)]
    pool.append(DiscretizedSignal(grid, np.zeros(32)))
    spec = window_spec(1.0, 1.0, S=4)
    samples = build_orbit_samples(pool, spec)
    assert samples[-1].weight == 0.0
    K = averaged_gram(pool, spec, samples)
    np.testing.assert_array_equal(K[-1], 0.0)


# -- averaged kernel ----------------------------------------------------------

def test_single_identity_shift_is_base_kernel():
    rng = np.random.default_rng(7)
    x, y = smooth_periodic(rng), smooth_periodic(rng)
    spec = periodic_spec(0.9, TWO_PI, S=1)
    s0 = OrbitSamples(0, np.zeros(1), 1.0)
    assert averaged_kernel_eval(spec, x, s0, y, s0) == pytest.approx(eval_kernel(spec.base, x, y), rel=1e-12)


def averaged_kernel_loop(spec, x, sx, y, sy):
    total = 0.0
    for g in sx.shifts:
        for h in sy.shifts:
            total += eval_kernel(spec.base, shift(x, g, spec.mode), shift(y, h, spec.mode))
    return sx.weight * sy.weight * total / (len(sx.shifts) * len(sy.shifts))


@pytest.mark.parametrize("setting", ["periodic", "window"])
def test_averaged_kernel_matches_loop_and_gram(setting):
    rng = np.random.default_rng(8)
    if setting == "periodic":
        pool = [smooth_periodic(rng, p=32) for _ in range(5)]
        spec = periodic_spec(1.3, TWO_PI, S=5, seed=9)
    else:
        grid = Grid(-5.0, 5.0, 32)
        pool = [DiscretizedSignal(grid, np.exp(-(grid.points - rng.normal()) ** 2) * rng.lognormal())
                for _ in range(5)]
        spec = window_spec(0.8, 1.1, S=5, seed=9)
    samples = build_orbit_samples(pool, spec)
    K = averaged_gram(pool, spec, samples)
    for i in range(5):
        for j in range(5):
            ref = averaged_kernel_loop(spec, pool[i], samples[i], pool[j], samples[j])
            assert averaged_kernel_eval(spec, pool[i], samples[i], pool[j], samples[j]) == pytest.approx(ref, rel=1e-10)
            assert K[i, j] == pytest.approx(ref, rel=1e-10, abs=1e-14)
            # bounded by the weights since the base kernel is at most 1
            assert K[i, j] <= samples[i].weight * samples[j].weight + 1e-12


def test_averaged_gram_psd_both_actions():
    rng = np.random.default_rng(10)
    for size in (2, 5, 11, 20):
        pool = [smooth_periodic(rng) for _ in range(size)]
        K = averaged_gram(pool, periodic_spec(rng.uniform(0.3, 2.0), TWO_PI, S=8, seed=size))
        assert np.linalg.eigvalsh(K).min() >= -1e-8
        grid = Grid(-5.0, 5.0, 64)
        pool = [DiscretizedSignal(grid, rng.standard_normal(64) * np.exp(-(grid.points - rng.normal()) ** 2))
                for _ in range(size)]
        K = averaged_gram(pool, window_spec(rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), S=8, seed=size))
        assert np.linalg.eigvalsh(K).min() >= -1e-8


def test_averaged_diagonal_block_symmetry():
    rng = np.random.default_rng(11)
    x = smooth_periodic(rng)
    spec = periodic_spec(1.0, TWO_PI, S=6, seed=1)
    sx = build_orbit_samples([x], spec)[0]
    v = averaged_kernel_eval(spec, x, sx, x, sx)
    assert 0 < v <= 1.0


# -- exact cyclic oracle --------------------------------------------------------

def exact_loop(base, x, y):
    L = x.grid.p - 1
    total = 0.0
    for r in range(L):
        xr = rotate(x, r)
        for s in range(L):
            total += eval_kernel(base, xr, rotate(y, s))
    return total / L ** 2


def test_exact_cyclic_constant_signals():
    grid = Grid(0.0, 1.0, 9)
    x = DiscretizedSignal(grid, np.full(9, 2.5))
    assert exact_cyclic_average(GaussianKernel(1.0), x, x) == pytest.approx(1.0, abs=1e-15)


def test_exact_cyclic_spikes_match_double_loop():
    grid = Grid(0.0, 1.0, 13)
    x = np.zeros(13)
    y = np.zeros(13)
    x[2] = 1.0
    y[7] = 2.0
    x, y = DiscretizedSignal(grid, x), DiscretizedSignal(grid, y)
    base = GaussianKernel(0.6)
    assert exact_cyclic_average(base, x, y) == pytest.approx(exact_loop(base, x, y), rel=1e-12)


def test_exact_cyclic_matches_double_loop_random():
    rng = np.random.default_rng(12)
    base = GaussianKernel(1.1)
    for _ in range(3):
        x, y = smooth_periodic(rng, p=17), smooth_periodic(rng, p=17)
        assert exact_cyclic_average(base, x, y) == pytest.approx(exact_loop(base, x, y), rel=1e-12)


def test_exact_cyclic_orbit_invariance():
    rng = np.random.default_rng(13)
    base = GaussianKernel(0.8)
    x, y = smooth_periodic(rng, p=33), smooth_periodic(rng, p=33)
    ref = exact_cyclic_average(base, x, y)
    for a in range(0, 32, 5):
        for b in range(0, 32, 7):
            assert exact_cyclic_average(base, rotate(x, a), rotate(y, b)) == pytest.approx(ref, rel=1e-13)


def test_monte_carlo_approaches_exact_average():
    rng = np.random.default_rng(14)
    x, y = smooth_periodic(rng), smooth_periodic(rng)
    base = GaussianKernel(1.0)
    exact = exact_cyclic_average(base, x, y)
    errs = []
    for S in (4, 16, 64, 256):
        e = []
        for seed in range(100):
            spec = AveragedKernelSpec(base, CircularShift(TWO_PI), Unit(), S, seed)
            sx, sy = build_orbit_samples([x, y], spec)
            e.append(abs(averaged_kernel_eval(spec, x, sx, y, sy) - exact))
        errs.append(np.mean(e))
    inversions = [i for i in range(3) if errs[i + 1] > errs[i]]
    assert len(inversions) <= 1
    assert all(errs[i + 1] <= 1.1 * errs[i] for i in inversions)
    assert errs[-1] <= 0.02


# -- window width heuristic ---------------------------------------------------

def test_select_c_examples():
    grid = Grid(-2.0, 2.0, 5)
    spike = DiscretizedSignal(grid, [0, 0, 0, 3.0, 0])
    pair = DiscretizedSignal(grid, [0, 1.0, 0, 1.0, 0])  # +-1, equal mass
    assert select_c([pair]) == pytest.approx(1.0, rel=1e-12)
    assert select_c([spike, pair]) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(AllDegenerate):
        select_c([spike])


def test_select_c_median_of_positive_spreads():
    # two equal spikes at +-s have spread s
    grid = Grid(-3.0, 3.0, 13)  # step 0.5
    def pair(s):
        v = np.zeros(13)
        v[6 - int(2 * s)] = v[6 + int(2 * s)] = 1.0
        return DiscretizedSignal(grid, v)
    spike = DiscretizedSignal(grid, np.eye(13)[4])
    assert select_c([spike, pair(0.5), pair(1.5), pair(2.5)]) == pytest.approx(1.5, rel=1e-12)
