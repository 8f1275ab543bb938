import numpy as np
import pytest

from phasebench import CapExceededError, NoiseChannelSpec, random_function
from phasebench.phase_states import build_phase_state
from phasebench.shadows import (
    SNAPSHOT_FACTORS, diag_covariance, element_variance, explicit_shadow_estimate,
    offdiag_block_covariance, reconstruct_from_counts, sample_surrogate, sample_surrogate_dense,
    surrogate_mean_matrix, surrogate_vs_truth_report,
)

DEPH = NoiseChannelSpec("dephasing", 0.1)
RELAX = NoiseChannelSpec("relaxation", 0.1)


def test_single_snapshot_z_outcome_zero():
    counts = np.zeros(6, dtype=np.int64)
    counts[4] = 1  # Z basis, outcome 0
    assert np.allclose(reconstruct_from_counts(counts), np.diag([2, -1]))


def test_snapshot_factors_have_unit_trace():
    assert np.allclose(np.trace(SNAPSHOT_FACTORS, axis1=1, axis2=2), 1.0)
    rho = explicit_shadow_estimate(build_phase_state(random_function(3, 0)), 7, 1)
    assert abs(np.trace(rho) - 1) < 1e-12


def test_large_shot_ground_state():
    zero = np.zeros(2, dtype=complex)
    zero[0] = 1
    n_c = 100_000
    rho = explicit_shadow_estimate(zero, n_c, 3)
    sigma = np.sqrt(element_variance(1, 0, n_c))
    assert abs(rho[0, 0] - 1) < 3 * sigma * 2


def test_explicit_unbiased_random_state(gen):
    n = 3
    psi = gen.standard_normal(8) + 1j * gen.standard_normal(8)
    psi /= np.linalg.norm(psi)
    n_c = 100_000
    rho, second = explicit_shadow_estimate(psi, n_c, 4, return_second_moment=True)
    true = np.outer(psi, psi.conj())
    sd = np.sqrt(np.clip(second - np.abs(true) ** 2, 1e-12, None) / n_c)
    assert np.all(np.abs(rho - true) < 5 * sd)


def test_explicit_cap():
    with pytest.raises(CapExceededError):
        explicit_shadow_estimate(np.ones(512) / np.sqrt(512), 10, 0)


def test_element_variance_examples():
    assert np.isclose(element_variance(2, 0, 100), 0.009375)
    assert np.isclose(element_variance(30, 2, 1), 2.25 - 4.0 ** -30)
    with pytest.raises(ValueError):
        element_variance(3, 4, 1)


def test_surrogate_infinite_shots_is_mean():
    f = random_function(4, 2)
    s = sample_surrogate(f, DEPH, None, None, np.inf, "full", 0)
    assert np.allclose(s.full, surrogate_mean_matrix(f, DEPH))
    a = 0b1011
    sec = sample_surrogate(f, DEPH, a, 0, np.inf, "sectors", 0)
    assert np.allclose(sec.row, s.full[a, :]) and np.allclose(sec.col, s.full[:, 0])


@pytest.mark.parametrize("mode", ["full", "sectors"])
def test_surrogate_trace_exact(mode):
    f = random_function(6, 1)
    for s in range(20):
        smp = sample_surrogate(f, RELAX, 0b100011, 0, 50.0, mode, s)
        smp.require("diag")
        assert abs(smp.diag.sum() - 1) < 1e-12


def test_shared_element_identity():
    f = random_function(7, 3)
    a = 0b1100101
    for y in (0, 5, 17):
        smp = sample_surrogate(f, DEPH, a, y, 30.0, "sectors", y)
        assert smp.row[y] == smp.col[y ^ a]


def test_full_surrogate_hermitian():
    smp = sample_surrogate(random_function(5, 0), RELAX, None, None, 100.0, "full", 2)
    assert np.allclose(smp.full, smp.full.conj().T)


def test_surrogate_diag_covariance_small():
    n, n_c, m = 3, 1.0, 40_000
    f = random_function(n, 0)
    d = np.array([sample_surrogate(f, DEPH, 0b100, 0, n_c, "sectors", s).diag for s in range(m)])
    emp = np.cov(d.T)
    ref = diag_covariance(n, n_c)
    assert np.max(np.abs(emp - ref)) < 0.05 * np.max(np.abs(ref))
    assert np.abs(d.sum(axis=1) - 1).max() < 1e-12


def test_block_covariance_nonnegative():
    for n in range(1, 6):
        for delta in range(1, 1 << n, 3):
            _, k = offdiag_block_covariance(n, delta)
            assert np.linalg.eigvalsh(k).min() > 0


def test_dense_reference_sampler_shapes():
    f = random_function(3, 0)
    out = sample_surrogate_dense(f, DEPH, 10.0, 0, 5)
    assert out.shape == (5, 8, 8)
    assert np.allclose(np.trace(out, axis1=1, axis2=2), 1.0)
    with pytest.raises(CapExceededError):
        sample_surrogate_dense(random_function(6, 0), DEPH, 10.0, 0)


def test_surrogate_caps_and_validation():
    with pytest.raises(CapExceededError):
        sample_surrogate(random_function(13, 0), DEPH, None, None, 10.0, "full", 0)
    with pytest.raises(ValueError):
        sample_surrogate(random_function(3, 0), DEPH, 0b100, 0, 0.0, "sectors", 0)


def test_report_decreases_and_rejects():
    rows = surrogate_vs_truth_report(3, [10, 100, 1000], DEPH, 20, 0)
    td = [r["td_explicit"] for r in rows]
    assert td[0] > td[1] > td[2]
    with pytest.raises(ValueError):
        surrogate_vs_truth_report(3, [0, 10], DEPH, 2, 0)
    with pytest.raises(CapExceededError):
        surrogate_vs_truth_report(7, [10], DEPH, 2, 0)
