#!/usr/bin/env python3
"""
矩阵核心模块测试
"""

import numpy as np
import pytest
import scipy.linalg as la
from scipy import stats

from conftest import SIGMA_X, SIGMA_Y
from src.errors import (
    DimensionMismatchError,
    LandscapeError,
    NotAntiHermitianError,
    NotHermitianError,
    NotUnitaryError,
)
from src.matcore import (
    SampleKind,
    as_anti_hermitian,
    as_hermitian,
    as_unitary,
    canonical_phases,
    check_dims,
    commutator,
    eig_unitary,
    eigh,
    expm_skew,
    frobenius,
    gue_hermitian,
    haar_unitary,
    instance_seed,
    sample,
    spectrum_from_values,
    unitarity_residual,
    unitary_from_phases,
)


def test_eigh_diagonal_input():
    spec = eigh(np.diag([0.0, 1.0]))
    np.testing.assert_allclose(spec.values, [1.0, 0.0])
    np.testing.assert_allclose(np.abs(spec.frame), [[0.0, 1.0], [1.0, 0.0]])


def test_eigh_pauli_x():
    spec = eigh(SIGMA_X)
    np.testing.assert_allclose(spec.values, [1.0, -1.0], atol=1e-14)
    assert spec.multiplicity == 1
    assert spec.gap == pytest.approx(2.0)


def test_eigh_reconstruction(rng):
    h = gue_hermitian(8, rng)
    spec = eigh(h)
    assert frobenius(spec.matrix() - h) <= 1e-10
    assert np.all(np.diff(spec.values) <= 0.0)


def test_degenerate_spectrum():
    spec = spectrum_from_values([0.2, 1.0, 1.0, 0.5])
    np.testing.assert_allclose(spec.values, [1.0, 1.0, 0.5, 0.2])
    assert spec.multiplicity == 2
    assert spec.gap == pytest.approx(0.5)
    assert spectrum_from_values([3.0, 3.0]).gap == 0.0
    assert spec.shifted(1.0).values[0] == pytest.approx(2.0)


def test_spectrum_rejects_empty():
    with pytest.raises(LandscapeError):
        spectrum_from_values([])


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitianError) as err:
        as_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert err.value.residual > 0.0


def test_non_unitary_rejected():
    with pytest.raises(NotUnitaryError):
        as_unitary(2.0 * np.eye(2))


def test_non_anti_hermitian_rejected():
    with pytest.raises(NotAntiHermitianError):
        as_anti_hermitian(SIGMA_X)


def test_small_anti_hermitian_with_rounding_accepted(rng):
    # 接近收敛时生成元范数很小, 舍入残差按绝对量计
    omega = 1e-9 * (1j * gue_hermitian(4, rng)) + 1e-20 * gue_hermitian(4, rng)
    out = as_anti_hermitian(omega)
    assert frobenius(out + out.conj().T) == 0.0
    with pytest.raises(NotAntiHermitianError):
        as_anti_hermitian(1e-3 * SIGMA_X)



def test_non_square_rejected():
    with pytest.raises(LandscapeError):
        as_hermitian(np.zeros((2, 3)))


def test_check_dims():
    check_dims("x", 3, 3)
    with pytest.raises(DimensionMismatchError):
        check_dims("x", 3, 4)


def test_commutator_pauli():
    np.testing.assert_allclose(commutator(SIGMA_X, SIGMA_Y), 2j * np.diag([1.0, -1.0]))


def test_eig_unitary_identity():
    phases = eig_unitary(np.eye(3))
    np.testing.assert_allclose(phases.phases, 0.0, atol=1e-14)


def test_eig_unitary_minus_one_is_plus_pi():
    phases = eig_unitary(np.diag([-1.0, 1.0]))
    assert sorted(phases.phases.tolist()) == pytest.approx([0.0, np.pi])
    assert np.pi in phases.phases.tolist()


def test_eig_unitary_reconstruction(rng):
    w = haar_unitary(6, rng)
    phases = eig_unitary(w)
    assert frobenius(unitary_from_phases(phases.phases, phases.frame) - w) <= 1e-9
    assert np.all(phases.phases > -np.pi)
    assert np.all(phases.phases <= np.pi)


def test_canonical_phases_branch():
    np.testing.assert_array_equal(canonical_phases([-np.pi, np.pi, 3 * np.pi]), [np.pi] * 3)
    assert canonical_phases([0.5])[0] == pytest.approx(0.5)


def test_expm_skew_zero():
    np.testing.assert_allclose(expm_skew(np.zeros((3, 3))), np.eye(3))


def test_expm_skew_scalar_phase():
    np.testing.assert_allclose(expm_skew(1j * np.pi * np.eye(2)), -np.eye(2), atol=1e-14)


def test_expm_skew_rotation():
    omega = 1j * SIGMA_Y * (np.pi / 2)
    u = expm_skew(omega)
    assert unitarity_residual(u) <= 1e-12
    np.testing.assert_allclose(u, la.expm(omega), atol=1e-12)


def test_expm_skew_inverse(rng):
    omega = 1j * gue_hermitian(5, rng)
    np.testing.assert_allclose(expm_skew(omega) @ expm_skew(-omega), np.eye(5), atol=1e-12)


def test_adjoint_phases_are_negated(rng):
    w = haar_unitary(5, rng)
    forward = np.sort(eig_unitary(w).phases)
    backward = np.sort(eig_unitary(w.conj().T).phases)
    np.testing.assert_allclose(backward, np.sort(-forward), atol=1e-10)
    # −1 本征值的相位在两侧都取 +π
    flip = eig_unitary(np.diag([-1.0, 1j]).astype(complex).conj().T).phases
    assert np.pi in flip.tolist()



def test_sample_deterministic():
    a = sample(SampleKind.HAAR_UNITARY, 4, 7)
    b = sample("haar_unitary", 4, 7)
    np.testing.assert_array_equal(a, b)
    assert unitarity_residual(a) <= 1e-10


def test_sample_kinds():
    h = sample(SampleKind.GUE_HERMITIAN, 3, 1)
    assert frobenius(h - h.conj().T) == 0.0
    spec = sample(SampleKind.SPECTRUM_UNIFORM, 5, 1, a=-1.0, b=2.0)
    assert np.all((spec.values >= -1.0) & (spec.values <= 2.0))


@pytest.mark.parametrize("n, seed", [(0, 1), (4, -1), (4, 2**64)])
def test_sample_rejects_bad_arguments(n, seed):
    with pytest.raises(LandscapeError):
        sample(SampleKind.HAAR_UNITARY, n, seed)


def test_haar_first_column_uniform():
    # N = 2 时 |U_11|² 在 [0, 1] 上均匀分布
    rng = np.random.default_rng(11)
    draws = np.array([abs(haar_unitary(2, rng)[0, 0]) ** 2 for _ in range(10000)])
    counts, _ = np.histogram(draws, bins=10, range=(0.0, 1.0))
    assert stats.chisquare(counts).pvalue > 0.01


def test_instance_seed():
    assert instance_seed(0, 4, 1) == instance_seed(0, 4, 1)
    seeds = {instance_seed(0, n, i) for n in (2, 4, 8) for i in range(10)}
    assert len(seeds) == 30
    assert all(0 <= s < 2**64 for s in seeds)
