import numpy as np
import pytest

from phasebench import NoiseChannelSpec
from phasebench.noise import apply_channel_to_density, kraus_operators
from phasebench.statevector import (
    GateOp, apply_gate, apply_readout_flips, group_by_jump_code, sample_decimated_ensemble,
    sample_kraus_trajectory, sample_measurement,
)


def _random_state(n, gen):
    v = gen.standard_normal(1 << n) + 1j * gen.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def test_hadamard_on_zero():
    out = apply_gate(np.array([1, 0], dtype=complex), GateOp("H", (0,)))
    assert np.allclose(out, np.array([1, 1]) / np.sqrt(2))


def test_cnot_control_zero_is_noop():
    psi = np.zeros(4, dtype=complex)
    psi[0b01] = 1
    assert np.allclose(apply_gate(psi, GateOp("CNOT", (1, 0))), psi)
    psi2 = np.zeros(4, dtype=complex)
    psi2[0b10] = 1
    assert np.argmax(np.abs(apply_gate(psi2, GateOp("CNOT", (1, 0))))) == 0b11


def test_swap_twice(gen):
    psi = _random_state(6, gen)
    g = GateOp("SWAP", (1, 4))
    out = apply_gate(apply_gate(psi, g), g)
    assert abs(abs(np.vdot(psi, out)) - 1) < 1e-10


def test_gate_validation():
    with pytest.raises(IndexError):
        apply_gate(np.ones(4) / 2, GateOp("H", (2,)))
    with pytest.raises(ValueError):
        GateOp("CNOT", (1, 1))


def test_norm_over_deep_circuit(gen):
    psi = _random_state(5, gen)
    kinds = ["H", "X", "Y", "Z"]
    for i in range(1000):
        if i % 3 == 0:
            a, b = gen.choice(5, 2, replace=False)
            psi = apply_gate(psi, GateOp("CNOT", (int(a), int(b))))
        else:
            psi = apply_gate(psi, GateOp(kinds[i % 4], (int(gen.integers(5)),)))
    assert abs(np.linalg.norm(psi) - 1) < 1e-10


def test_trajectory_trivial_channel(gen):
    psi = _random_state(3, gen)
    out, code = sample_kraus_trajectory(psi, NoiseChannelSpec("relaxation", 0.0), gen)
    assert np.allclose(out, psi) and not code.any()


def test_full_decay_jump():
    one = np.array([0, 1], dtype=complex)
    out, code = sample_kraus_trajectory(one, NoiseChannelSpec("relaxation", 1.0), 0)
    assert np.allclose(np.abs(out), [1, 0]) and code[0] == 1


def test_dephasing_jump_frequency():
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    gen = np.random.default_rng(5)
    n = 100_000
    jumps = sum(int(sample_kraus_trajectory(plus, NoiseChannelSpec("dephasing", 0.5), gen)[1][0]) for _ in range(n))
    assert abs(jumps / n - 0.5) < 3 * np.sqrt(0.25 / n)


@pytest.mark.parametrize("kind", ["dephasing", "depolarizing", "relaxation"])
def test_trajectory_average_matches_channel(kind, gen):
    spec = NoiseChannelSpec(kind, 0.3)
    psi = _random_state(3, gen)
    exact = np.outer(psi, psi.conj())
    for q in range(3):
        exact = apply_channel_to_density(exact, kraus_operators(spec), q)
    groups = sample_decimated_ensemble(psi, spec, 100_000, gen)
    est = sum(g.multiplicity * np.outer(g.state, g.state.conj()) for g in groups) / 100_000
    assert 0.5 * np.abs(np.linalg.eigvalsh(est - exact)).sum() < 0.01
    for g in groups:
        assert abs(np.linalg.norm(g.state) - 1) < 1e-10


def test_decimation_matches_grouping_law():
    spec = NoiseChannelSpec("depolarizing", 0.4)
    psi = np.ones(4, dtype=complex) / 2
    gen = np.random.default_rng(8)
    grouped = group_by_jump_code(sample_kraus_trajectory(psi, spec, gen) for _ in range(20_000))
    direct = {g.code: g.multiplicity / 20_000 for g in grouped}
    dec = {g.code: g.multiplicity / 20_000 for g in sample_decimated_ensemble(psi, spec, 20_000, gen)}
    for code in set(direct) | set(dec):
        assert abs(direct.get(code, 0) - dec.get(code, 0)) < 0.02


def test_measurement_examples():
    zero = np.zeros(8, dtype=complex)
    zero[0] = 1
    assert not sample_measurement(zero, 1000, 0).any()
    plus3 = np.ones(8, dtype=complex) / np.sqrt(8)
    n = 100_000
    freq = np.bincount(sample_measurement(plus3, n, 1), minlength=8) / n
    assert np.all(np.abs(freq - 1 / 8) < 3 * np.sqrt((1 / 8) * (7 / 8) / n))


def test_replay_determinism():
    psi = np.ones(16, dtype=complex) / 4
    assert np.array_equal(sample_measurement(psi, 50, 42), sample_measurement(psi, 50, 42))


def test_readout_flips():
    x = np.arange(16)
    assert np.array_equal(apply_readout_flips(x, 4, 0.0, 0), x)
    assert np.array_equal(apply_readout_flips(x, 4, 1.0, 0), x ^ 15)
    n = 250_000
    flipped = apply_readout_flips(np.zeros(n, dtype=np.int64), 4, 0.1, 3)
    rate = np.mean([(flipped >> b) & 1 for b in range(4)])
    assert abs(rate - 0.1) < 3 * np.sqrt(0.09 / (4 * n))
    with pytest.raises(ValueError):
        apply_readout_flips(x, 4, 1.5, 0)
