import math

import numpy as np
import pytest

from phasebench import NoiseChannelSpec, concept_for_rule, random_function
from phasebench.noise import (
    CHANNEL_KINDS, IdleNoiseSpec, attenuation, expected_visibility_vp, gate_error_params,
    idle_probabilities, kraus_operators,
)
from phasebench.shadows import noisy_density_matrix
from phasebench.statevector import sample_kraus_trajectory


def _completeness(ops):
    return sum(k.conj().T @ k for k in ops)


def test_kraus_examples():
    ops = kraus_operators(NoiseChannelSpec("dephasing", 0.0))
    assert len(ops) == 1 and np.allclose(ops[0], np.eye(2))
    k0, k1 = kraus_operators(NoiseChannelSpec("relaxation", 1.0))
    assert np.allclose(k0, [[1, 0], [0, 0]]) and np.allclose(k1, [[0, 1], [0, 0]])
    assert np.allclose(_completeness(kraus_operators(NoiseChannelSpec("depolarizing", 0.3))), np.eye(2))


@pytest.mark.parametrize("kind", CHANNEL_KINDS)
def test_kraus_completeness_random(kind, gen):
    for e in gen.random(50):
        err = np.abs(_completeness(kraus_operators(NoiseChannelSpec(kind, e))) - np.eye(2)).max()
        assert err < 1e-12


def test_spec_validation():
    with pytest.raises(ValueError):
        NoiseChannelSpec("bitflip", 0.1)
    with pytest.raises(ValueError):
        NoiseChannelSpec("dephasing", 1.5)


def test_attenuation_table():
    a = attenuation(NoiseChannelSpec("dephasing", 0.1))
    assert math.isclose(a.gamma_act, 0.8) and a.gamma_pass == 1.0
    a = attenuation(NoiseChannelSpec("depolarizing", 0.3))
    assert math.isclose(a.gamma_act, 0.6) and math.isclose(a.gamma_pass, 0.8)
    a = attenuation(NoiseChannelSpec("relaxation", 0.0))
    assert a.gamma_act == a.gamma_pass == 1.0
    a = attenuation(NoiseChannelSpec("relaxation", 0.1))
    assert a.gamma_p0 == 1.0 and math.isclose(a.gamma_p1, 0.9)


def test_visibility_examples():
    v = expected_visibility_vp(NoiseChannelSpec("dephasing", 0.1), 7, 2)
    assert math.isclose(v, 0.64) and math.isclose((1 + v) / 2, 0.82)
    for kind in CHANNEL_KINDS:
        assert expected_visibility_vp(NoiseChannelSpec(kind, 0.0), 5, 3) == 1.0
    assert math.isclose(expected_visibility_vp(NoiseChannelSpec("relaxation", 0.1), 4, 2), 0.81225)
    with pytest.raises(ValueError):
        expected_visibility_vp(NoiseChannelSpec("depolarizing", 0.8), 4, 2)
    with pytest.raises(ValueError):
        expected_visibility_vp(NoiseChannelSpec("dephasing", 0.1), 4, 0)


@pytest.mark.parametrize("kind", CHANNEL_KINDS)
def test_single_qubit_attenuation_monte_carlo(kind):
    spec = NoiseChannelSpec(kind, 0.2)
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    gen = np.random.default_rng(3)
    n = 100_000
    rho01 = 0.0
    for _ in range(n):
        psi, _ = sample_kraus_trajectory(plus, spec, gen)
        rho01 += (psi[0] * np.conj(psi[1])).real
    est = 2 * rho01 / n
    sigma = 1 / np.sqrt(n)
    assert abs(est - attenuation(spec).gamma_act) < 3 * sigma


@pytest.mark.parametrize("kind", CHANNEL_KINDS)
@pytest.mark.parametrize("n_q", [3, 4, 5])
def test_visibility_matches_density_matrix(kind, n_q):
    spec = NoiseChannelSpec(kind, 0.1)
    for rule in ("full", "half"):
        a = concept_for_rule(n_q, rule)
        y = np.arange(1 << (n_q - 1))
        vals = []
        for s in range(200):
            f = random_function(n_q, s)
            el = np.real(noisy_density_matrix(f, spec)[y, y ^ a.alpha])
            vals.append(2 * np.sum(np.abs(el)))
        assert abs(np.mean(vals) - expected_visibility_vp(spec, n_q, a.weight)) < 0.01


def test_idle_probabilities():
    assert idle_probabilities(IdleNoiseSpec(10.0, 5.0, 0.0)) == (0.0, 0.0)
    for t in (0.1, 1.0, 7.0):
        assert idle_probabilities(IdleNoiseSpec(3.0, 6.0, t))[1] == 0.0
    p_amp, p_phase = idle_probabilities(IdleNoiseSpec(2.0, 2.0, 2.0))
    assert math.isclose(p_amp, 1 - math.exp(-1)) and math.isclose(p_phase, 1 - math.exp(-0.5))
    assert round(p_amp, 4) == 0.6321 and round(p_phase, 4) == 0.3935
    with pytest.raises(ValueError):
        IdleNoiseSpec(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        IdleNoiseSpec(1.0, 3.0, 1.0)


def test_gate_error_params():
    e1, e2 = gate_error_params(0.9999, 0.99)
    assert math.isclose(e1, 1.5e-4, rel_tol=1e-9) and math.isclose(e2, 0.0125, rel_tol=1e-9)
    assert gate_error_params(1.0, 1.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        gate_error_params(1.1, 0.9)
