#!/usr/bin/env python3
"""
动力学控制模块测试: 传播、场梯度、G 矩阵、链式法则与梯度上升
"""

import math

import numpy as np
import pytest

from conftest import SIGMA_X, SIGMA_Z
from src.complexity import HaltSpec
from src.dyncontrol import (
    ControlField,
    ControlSystem,
    Objective,
    check_chain_rule,
    fd_gradient,
    g_matrix,
    grad_phi1,
    grad_phi2,
    gradient,
    gradient_ascent,
    heisenberg_dipole,
    propagate,
)
from src.errors import DimensionMismatchError, LandscapeError, MemoryGuardError
from src.matcore import gue_hermitian, haar_unitary, unitarity_residual
from src.scenarios import demo_system, population_transfer


def _relative(value, reference):
    return np.linalg.norm(value - reference) / np.linalg.norm(reference)


# ---------------------------------------------------------------- 传播


def test_free_null_drift_is_identity():
    system = ControlSystem(np.zeros((2, 2)), SIGMA_X, horizon=1.0, steps=10)
    u_t, grid = propagate(system, ControlField.constant(10))
    np.testing.assert_allclose(u_t, np.eye(2), atol=1e-14)
    assert len(grid) == 11


def test_propagation_is_unitary(rng):
    system = ControlSystem(gue_hermitian(4, rng), gue_hermitian(4, rng), horizon=3.0, steps=30)
    u_t, _ = propagate(system, ControlField(rng.normal(size=30)))
    assert unitarity_residual(u_t) <= 1e-12


def test_control_system_validation():
    with pytest.raises(LandscapeError):
        ControlSystem(SIGMA_Z, SIGMA_X, horizon=1.0, steps=1)
    with pytest.raises(LandscapeError):
        ControlSystem(SIGMA_Z, SIGMA_X, horizon=0.0, steps=4)
    with pytest.raises(DimensionMismatchError):
        ControlSystem(SIGMA_Z, np.eye(3), horizon=1.0, steps=4)


def test_field_length_checked():
    system = ControlSystem(SIGMA_Z, SIGMA_X, horizon=1.0, steps=4)
    with pytest.raises(DimensionMismatchError):
        propagate(system, ControlField.constant(5))


def test_heisenberg_dipole_initial():
    system = ControlSystem(SIGMA_Z, SIGMA_X, horizon=1.0, steps=4)
    _, grid = propagate(system, ControlField.constant(4, 0.2))
    np.testing.assert_allclose(heisenberg_dipole(system, grid)[0], -1j * SIGMA_X)


def test_heisenberg_dipole_commuting_is_constant():
    system = ControlSystem(SIGMA_Z, 0.5 * SIGMA_Z, horizon=2.0, steps=8)
    _, grid = propagate(system, ControlField.constant(8, 0.7))
    for mu_t in heisenberg_dipole(system, grid):
        np.testing.assert_allclose(mu_t, -0.5j * SIGMA_Z, atol=1e-14)


# ---------------------------------------------------------------- 场梯度


@pytest.mark.parametrize("n, seed", [(2, 3), (3, 4)])
def test_gradient_matches_finite_differences(n, seed):
    system, ctrl, phi1, phi2 = demo_system(n, seed)
    for objective in (phi1, phi2):
        exact = gradient(system, ctrl, objective)
        assert _relative(exact, fd_gradient(system, ctrl, objective)) <= 1e-5


def test_midpoint_quadrature_converges():
    rng = np.random.default_rng(8)
    h0, mu = gue_hermitian(2, rng), gue_hermitian(2, rng)
    objective = Objective.gate(haar_unitary(2, rng))
    errors = []
    for steps in (50, 100):
        system = ControlSystem(h0, mu, horizon=1.0, steps=steps)
        ctrl = ControlField(0.3 * np.sin(np.pi * system.midpoints))
        exact = gradient(system, ctrl, objective)
        errors.append(_relative(gradient(system, ctrl, objective, "midpoint"), exact))
    assert errors[1] < errors[0]
    assert errors[1] <= 1e-3


def test_gradient_unknown_quadrature():
    system, ctrl, phi1, _ = demo_system(2, 1)
    with pytest.raises(LandscapeError):
        gradient(system, ctrl, phi1, "simpson")


def test_phi1_gradient_vanishes_at_commuting_point():
    system = ControlSystem(SIGMA_Z, 0.3 * SIGMA_Z, horizon=1.0, steps=8)
    ctrl = ControlField.constant(8, 0.4)
    grad = grad_phi1(system, ctrl, np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    np.testing.assert_allclose(grad, 0.0, atol=1e-14)


def test_phi2_gradient_vanishes_at_solution(rng):
    system = ControlSystem(gue_hermitian(2, rng), SIGMA_X, horizon=1.0, steps=8)
    ctrl = ControlField(rng.normal(size=8))
    u_t, _ = propagate(system, ctrl)
    np.testing.assert_allclose(grad_phi2(system, ctrl, u_t), 0.0, atol=1e-12)


def test_phi2_gradient_linear_in_weight():
    system, ctrl, _, phi2 = demo_system(2, 6)
    weight = np.diag([1.0, 0.4])
    base = grad_phi2(system, ctrl, phi2.target, weight)
    scaled = grad_phi2(system, ctrl, phi2.target, 3.0 * weight)
    np.testing.assert_allclose(scaled, 3.0 * base, rtol=1e-12, atol=1e-14)


# ---------------------------------------------------------------- G 矩阵与链式法则


def test_g_matrix_constant_dipole():
    system = ControlSystem(np.zeros((2, 2)), SIGMA_X, horizon=1.0, steps=20)
    _, grid = propagate(system, ControlField.constant(20))
    g = g_matrix(system, grid)
    assert g.entry(1, 2, 2, 1) == pytest.approx(-1.0)
    assert g.entry(1, 1, 1, 1) == pytest.approx(0.0)
    assert g.symmetry_residual == pytest.approx(0.0)


def test_g_matrix_real_form_is_psd():
    system, ctrl, _, _ = demo_system(2, 2)
    _, grid = propagate(system, ctrl)
    g = g_matrix(system, grid, ctrl)
    assert np.min(np.linalg.eigvalsh(g.real)) >= -1e-12


def test_g_matrix_memory_guard():
    system = ControlSystem(np.zeros((33, 33)), np.eye(33), horizon=1.0, steps=2)
    with pytest.raises(MemoryGuardError):
        g_matrix(system, [])


@pytest.mark.parametrize("which", ["phi1", "phi2"])
def test_chain_rule_first_order(which):
    system, ctrl, phi1, phi2 = demo_system(2, 9)
    objective = phi1 if which == "phi1" else phi2
    residual = check_chain_rule(system, ctrl, objective, 1e-4)
    half = check_chain_rule(system, ctrl, objective, 5e-5)
    assert residual <= 1e-2
    assert 0.4 <= half / residual <= 0.6


def test_chain_rule_critical_point():
    system = ControlSystem(SIGMA_Z, 0.3 * SIGMA_Z, horizon=1.0, steps=8)
    objective = Objective.observable(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert math.isnan(check_chain_rule(system, ControlField.constant(8), objective))


def test_chain_rule_step_range():
    system, ctrl, phi1, _ = demo_system(2, 1)
    with pytest.raises(LandscapeError):
        check_chain_rule(system, ctrl, phi1, 1e-2)


# ---------------------------------------------------------------- 梯度上升


def test_ascent_population_transfer():
    system, field0, objective = population_transfer()
    result = gradient_ascent(system, field0, objective, HaltSpec(1e-3, require_region=False))
    phis = [step.phi for step in result.history]
    assert result.status in ("halted", "gradient_tol")
    assert phis[-1] >= 0.999
    assert all(b >= a - 1e-14 for a, b in zip(phis, phis[1:]))


def test_ascent_at_critical_point():
    system = ControlSystem(SIGMA_Z, 0.3 * SIGMA_Z, horizon=1.0, steps=8)
    objective = Objective.observable(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    result = gradient_ascent(system, ControlField.constant(8), objective)
    assert result.status == "gradient_tol"
    assert len(result.history) == 1


def test_ascent_rejects_bad_sigma():
    system, field0, objective = population_transfer()
    with pytest.raises(LandscapeError):
        gradient_ascent(system, field0, objective, sigma=0.0)
