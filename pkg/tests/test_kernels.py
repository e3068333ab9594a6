"""Cost kernels, the log-domain residual, and the convex-sigmoid identity."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdopt.kernels import (
    CostConfig,
    CostKernel,
    KdlDomainError,
    SQUARE_CUBIC_COEFF,
    apply_kdl,
    cost_residual,
    cost_residual_chain,
    cost_update,
    logistic,
    logistic_derivative,
)

finite = st.floats(min_value=-100.0, max_value=100.0, allow_nan=False)


def test_square_kernel_is_two_thirds_cubic_exactly():
    k = CostKernel("square")
    for rho in np.linspace(-10, 10, 2001):
        expected = SQUARE_CUBIC_COEFF * rho ** 3
        got = k.u(float(rho))
        assert got == pytest.approx(expected, rel=4e-16, abs=0.0) or got == expected


def test_square_kernel_unit_residual():
    assert CostKernel("square").u(1.0) == 2.0 / 3.0


def test_kernels_vanish_at_zero():
    assert CostKernel("square").u(0.0) == 0.0
    assert CostKernel("sigmoid_convex").u(0.0) == 0.0


def test_sigmoid_kernel_matches_centered_logistic():
    k = CostKernel("sigmoid_convex")
    for rho in np.linspace(-36, 36, 1001):
        direct = 2.0 * logistic(float(rho)) - 1.0
        assert abs(k.u(float(rho)) - direct) <= 4e-16 * max(1.0, abs(direct))


def test_sigmoid_kernel_saturates_below_one():
    k = CostKernel("sigmoid_convex")
    assert 1.0 - 1e-12 < k.u(30.0) < 1.0
    for rho in np.linspace(0.1, 18, 200):
        assert abs(k.u(float(rho))) < 1.0


@given(finite)
def test_kernel_oddness(rho):
    for kind in ("square", "sigmoid_convex"):
        k = CostKernel(kind)
        assert abs(k.u(-rho) + k.u(rho)) <= 1e-12


@given(st.floats(min_value=1e-8, max_value=100.0), st.floats(min_value=0.0, max_value=99.0))
def test_kernel_monotonicity(a, d):
    for kind in ("square", "sigmoid_convex"):
        k = CostKernel(kind)
        assert k.u(a + d + 1e-9) > k.u(a) - 1e-15


def test_unknown_kernel_kind_rejected():
    with pytest.raises(ValueError):
        CostKernel("cubic")


# -- KDL ----------------------------------------------------------------------

def test_kdl_zero_iff_equal():
    assert apply_kdl(5.0, 5.0, 1.0) == 0.0


def test_kdl_unit_value():
    assert apply_kdl(math.e - 1.0, 0.0, 1.0) == pytest.approx(1.0, rel=1e-15)


def test_kdl_lj_scale_example():
    got = apply_kdl(-44.0, -44.32, 50.0)
    assert got == pytest.approx(math.log(6.0) - math.log(5.68), rel=1e-15)
    assert got == pytest.approx(0.0548, abs=2e-4)


def test_kdl_domain_errors_name_the_value():
    with pytest.raises(KdlDomainError, match="rho_n"):
        apply_kdl(-2.0, 0.0, 1.0)
    with pytest.raises(KdlDomainError, match="rho_0"):
        apply_kdl(0.0, -2.0, 1.0)


@given(st.floats(min_value=-40.0, max_value=40.0),
       st.floats(min_value=41.0, max_value=200.0))
def test_kdl_sign_matches_plain_residual(rho_n, off):
    rho_0 = -1.5
    kdl = apply_kdl(rho_n, rho_0, off)
    plain = rho_n - rho_0
    assert (kdl > 0) == (plain > 0) or plain == 0


def test_cost_update_square_unit():
    cfg = CostConfig(kernel=CostKernel("square"), rho_target=0.0)
    assert cost_update(cfg.kernel, 1.0, cfg) == 2.0 / 3.0


def test_cost_update_zero_residual_any_kernel():
    for kind in ("square", "sigmoid_convex"):
        cfg = CostConfig(kernel=CostKernel(kind), rho_target=2.5)
        assert cost_update(cfg.kernel, 2.5, cfg) == 0.0


def test_cost_update_sign_tracks_residual():
    cfg = CostConfig(kernel=CostKernel("square"), rho_target=1.0)
    assert cost_update(cfg.kernel, 3.0, cfg) > 0
    assert cost_update(cfg.kernel, 0.0, cfg) < 0


def test_cost_residual_kdl_chain():
    cfg = CostConfig(kernel=CostKernel("square"), rho_target=-44.3268,
                     use_kdl=True, kdl_offset=50.0)
    r = cost_residual(-44.0, cfg)
    assert r == pytest.approx(math.log(6.0) - math.log(50.0 - 44.3268), rel=1e-12)
    assert cost_residual_chain(-44.0, cfg) == pytest.approx(1.0 / 6.0, rel=1e-15)


def test_cost_config_rejects_bad_offset():
    with pytest.raises(ValueError):
        CostConfig(kernel=CostKernel("square"), use_kdl=True, kdl_offset=0.0)


# -- convex-from-sigmoid derivative identity -----------------------------------

def test_logistic_derivative_identity_on_grid():
    # d/drho [1/(1+exp(-rho))] == exp(-rho)/(1+exp(-rho))**2, checked both
    # against the closed form and by central differencing
    grid = np.linspace(-10, 10, 2001)
    worst_closed = 0.0
    worst_fd = 0.0
    h = 1e-5
    for rho in grid:
        rho = float(rho)
        stated = math.exp(-rho) / (1.0 + math.exp(-rho)) ** 2
        closed = logistic_derivative(rho)
        fd = (logistic(rho + h) - logistic(rho - h)) / (2 * h)
        worst_closed = max(worst_closed, abs(closed - stated))
        worst_fd = max(worst_fd, abs(fd - stated))
    assert worst_closed < 1e-15
    assert worst_fd < 1e-10
