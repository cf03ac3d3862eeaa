"""Tests for the non-equispaced Fourier transforms.

The direct transforms are checked against a literal double loop written
independently of the library code; the fast transforms are checked
against the direct ones.
"""

import itertools
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import i0

from nfftkrr import (
    GridSpec,
    NfftPlan,
    ShapeError,
    ValidationError,
    ndft_adjoint_direct,
    ndft_direct,
)
from nfftkrr.nfft import PROFILES, _kb_fourier, _kb_window


def brute_force_forward(bandwidths, coords, f_hat):
    """Independent oracle: literal sum over all (j, k) pairs."""
    ranges = [range(-b // 2, b // 2) for b in bandwidths]
    out = []
    for j in range(coords.shape[0]):
        acc = 0.0 + 0.0j
        for flat, k in enumerate(itertools.product(*ranges)):
            phase = sum(kt * xt for kt, xt in zip(k, coords[j]))
            acc += f_hat[flat] * np.exp(2j * np.pi * phase)
        out.append(acc)
    return np.array(out)


def rel_err(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_ndft_direct_constant_coefficients():
    # all exponentials equal 1 at x = 0
    f = ndft_direct(GridSpec((4,)), np.array([[0.0]]), np.ones(4))
    assert abs(f[0] - 4.0) < 1e-14


def test_ndft_direct_single_mode():
    f_hat = np.zeros(4, dtype=complex)
    f_hat[3] = 1.0  # axis order -2,-1,0,1 puts k=1 at index 3
    f = ndft_direct(GridSpec((4,)), np.array([[0.25]]), f_hat)
    assert abs(f[0] - 1j) < 1e-14


def test_ndft_direct_matches_brute_force_2d():
    rng = np.random.default_rng(7)
    coords = rng.uniform(-0.5, 0.5, size=(16, 2))
    f_hat = rng.normal(size=64) + 1j * rng.normal(size=64)
    expected = brute_force_forward((8, 8), coords, f_hat)
    got = ndft_direct(GridSpec((8, 8)), coords, f_hat)
    assert rel_err(got, expected) < 1e-12


def test_forward_constant_coefficients_fine():
    plan = NfftPlan(GridSpec((4,)), np.array([[0.0]]), "fine")
    f = plan.forward(np.ones(4))
    assert abs(f[0] - 4.0) / 4.0 < 1e-8


def test_forward_zero_is_exactly_zero():
    rng = np.random.default_rng(1)
    plan = NfftPlan(GridSpec((8, 8)), rng.uniform(-0.5, 0.5, (30, 2)))
    out = plan.forward(np.zeros(64, dtype=complex))
    assert np.all(out == 0.0)


def test_forward_3d_matches_direct_fine():
    rng = np.random.default_rng(3)
    grid = GridSpec((16, 16, 16))
    coords = rng.uniform(-0.5, 0.5, size=(200, 3))
    f_hat = rng.normal(size=grid.n_modes) + 1j * rng.normal(size=grid.n_modes)
    f_hat /= np.linalg.norm(f_hat)
    plan = NfftPlan(grid, coords, "fine")
    assert rel_err(plan.forward(f_hat), ndft_direct(grid, coords, f_hat)) < 1e-6


def test_adjoint_single_node_at_origin():
    plan = NfftPlan(GridSpec((8,)), np.array([[0.0]]), "fine")
    g = plan.adjoint(np.array([1.0 + 0j]))
    assert np.allclose(g, 1.0, atol=1e-9)


def test_adjoint_zero_is_exactly_zero():
    rng = np.random.default_rng(2)
    plan = NfftPlan(GridSpec((8,)), rng.uniform(-0.5, 0.5, (20, 1)))
    assert np.all(plan.adjoint(np.zeros(20, dtype=complex)) == 0.0)


def test_adjoint_matches_direct():
    rng = np.random.default_rng(11)
    grid = GridSpec((16, 16))
    coords = rng.uniform(-0.5, 0.5, size=(150, 2))
    c = rng.normal(size=150) + 1j * rng.normal(size=150)
    plan = NfftPlan(grid, coords, "fine")
    assert rel_err(plan.adjoint(c), ndft_adjoint_direct(grid, coords, c)) < 1e-6


@pytest.mark.parametrize("d", [1, 2, 3])
def test_adjointness_identity(d):
    rng = np.random.default_rng(20 + d)
    grid = GridSpec((8,) * d)
    coords = rng.uniform(-0.5, 0.5, size=(60, d))
    plan = NfftPlan(grid, coords, "default")
    for _ in range(20):
        f_hat = rng.normal(size=grid.n_modes) + 1j * rng.normal(size=grid.n_modes)
        c = rng.normal(size=60) + 1j * rng.normal(size=60)
        lhs = np.vdot(c, plan.forward(f_hat))
        rhs = np.vdot(plan.adjoint(c), f_hat)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(f_hat) * np.linalg.norm(c)


def test_accuracy_ladder_monotone():
    rng = np.random.default_rng(5)
    grid = GridSpec((16, 16))
    coords = rng.uniform(-0.5, 0.5, size=(100, 2))
    f_hat = rng.normal(size=grid.n_modes) + 1j * rng.normal(size=grid.n_modes)
    ref = ndft_direct(grid, coords, f_hat)
    errs = [
        rel_err(NfftPlan(grid, coords, name).forward(f_hat), ref)
        for name in ("rough", "default", "fine")
    ]
    assert errs[0] >= errs[1] >= errs[2]


@pytest.mark.parametrize("name,target", [("rough", 1e-3), ("default", 1e-6), ("fine", 1e-9)])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_profile_error_targets(name, target, d):
    rng = np.random.default_rng(40 + d)
    grid = GridSpec((16,) * d)
    coords = rng.uniform(-0.5, 0.5, size=(150, d))
    f_hat = rng.normal(size=grid.n_modes) + 1j * rng.normal(size=grid.n_modes)
    ref = ndft_direct(grid, coords, f_hat)
    assert rel_err(NfftPlan(grid, coords, name).forward(f_hat), ref) <= target


def test_linearity():
    rng = np.random.default_rng(6)
    grid = GridSpec((16,))
    coords = rng.uniform(-0.5, 0.5, size=(50, 1))
    plan = NfftPlan(grid, coords)
    u = rng.normal(size=16) + 1j * rng.normal(size=16)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    a, b = 2.5 - 1j, -0.75 + 3j
    lhs = plan.forward(a * u + b * v)
    rhs = a * plan.forward(u) + b * plan.forward(v)
    assert rel_err(lhs, rhs) < 1e-12


def test_node_domain_half_open():
    grid = GridSpec((8,))
    NfftPlan(grid, np.array([[-0.5]]))  # -1/2 accepted
    with pytest.raises(ValidationError):
        NfftPlan(grid, np.array([[0.5]]))  # +1/2 rejected
    with pytest.raises(ValidationError):
        NfftPlan(grid, np.array([[0.7]]))
    with pytest.raises(ValidationError):
        ndft_direct(grid, np.array([[np.nan]]), np.zeros(8))


def test_shape_validation():
    rng = np.random.default_rng(8)
    grid = GridSpec((8, 8))
    plan = NfftPlan(grid, rng.uniform(-0.5, 0.5, (10, 2)))
    with pytest.raises(ShapeError):
        plan.forward(np.zeros(63))
    with pytest.raises(ShapeError):
        plan.adjoint(np.zeros(11))
    with pytest.raises(ShapeError):
        ndft_direct(grid, rng.uniform(-0.5, 0.5, (10, 2)), np.zeros(10))


def test_grid_validation():
    with pytest.raises(ValidationError):
        GridSpec((7,))  # odd
    with pytest.raises(ValidationError):
        GridSpec((0,))
    with pytest.raises(ValidationError):
        GridSpec((8, 8, 8, 8))  # d > 3


def test_kb_window_fourier_pair():
    # the deconvolution factors are the analytic Fourier transform of the
    # window; check the closed form against straight quadrature
    n, m = 32, 4
    b = np.pi * (2.0 - 16 / n)
    for k in (0, 3, -7):
        num, _ = quad(
            lambda x: _kb_window(np.array([n * x]), m, b)[0] * np.cos(2 * np.pi * k * x),
            -m / n,
            m / n,
            limit=200,
        )
        closed = _kb_fourier(np.array([k]), n, m, b)[0]
        assert abs(num - closed) < 1e-8 * abs(closed)


def test_kb_fourier_positive_on_grid():
    for name, prof in PROFILES.items():
        for M in (8, 16, 64):
            n = int(np.ceil(prof.oversampling * M))
            n += n % 2
            b = np.pi * (2.0 - M / n)
            k = np.arange(-M // 2, M // 2)
            vals = _kb_fourier(k, n, m=prof.cutoff, b=b)
            assert np.all(vals > 0), name


def test_forward_cost_scales_at_most_linearly():
    # wall time slope over a 64x node range stays below 1.15 (log-log fit)
    rng = np.random.default_rng(9)
    grid = GridSpec((16, 16))
    f_hat = rng.normal(size=grid.n_modes) + 1j * rng.normal(size=grid.n_modes)
    sizes = [2**10, 2**12, 2**14, 2**16]
    times = []
    for n in sizes:
        plan = NfftPlan(grid, rng.uniform(-0.5, 0.5, (n, 2)))
        plan.forward(f_hat)  # warm-up
        best = np.inf
        for _ in range(5):
            t0 = time.perf_counter()
            plan.forward(f_hat)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
    slope = np.polyfit(np.log(sizes), np.log(times), 1)[0]
    assert slope <= 1.15, f"observed slope {slope:.3f} with times {times}"
