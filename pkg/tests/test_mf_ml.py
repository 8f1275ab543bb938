import numpy as np
import pytest

from phasebench import NoiseChannelSpec, concept_for_rule, random_function
from phasebench.mf.ml import (
    LogisticModel, TrainConfig, baseline_classifier, extract_features, make_dataset, shell_masks, train,
)
from phasebench.mf.spectral import single_element_decode
from phasebench.phase_states import target_bit
from phasebench.shadows import sample_surrogate

CLEAN = NoiseChannelSpec("dephasing", 0.0)
DEPH = NoiseChannelSpec("dephasing", 0.1)


def test_feature_lengths():
    f = random_function(6, 0)
    a = concept_for_rule(6, "full").alpha
    smp = sample_surrogate(f, DEPH, a, 0, 100.0, "sectors", 0)
    assert extract_features(smp, 0, a, "baseline").values.size == 6 + 2
    assert extract_features(smp, 0, a, "paired").values.size == 2 * 6 + 1
    with pytest.raises(ValueError):
        extract_features(smp, 0, a, "deep")
    with pytest.raises(ValueError):
        extract_features(smp, 3, a)


def test_ideal_shell_values():
    n = 6
    a = concept_for_rule(n, "half").alpha
    for s in range(10):
        f = random_function(n, s)
        smp = sample_surrogate(f, CLEAN, a, 0, np.inf, "sectors", 0)
        feat = extract_features(smp, 0, a, "paired")
        rr = feat.values[3:3 + n - 1]
        ii = feat.values[3 + n - 1:]
        sign = 1 - 2 * target_bit(f, 0, a)
        assert np.allclose(rr[~feat.empty_shells], sign / 4.0 ** n)
        assert np.allclose(ii, 0.0)


def test_shells_exclude_anchors_and_flag_empty():
    shells = shell_masks(2, 0, 0b11)
    assert [s.tolist() for s in shells] == [[1, 2]]
    shells = shell_masks(3, 0, 0b100)
    assert all(4 not in s and 0 not in s for s in shells)
    f = random_function(2, 0)
    smp = sample_surrogate(f, CLEAN, 0b10, 0, np.inf, "sectors", 0)
    feat = extract_features(smp, 0, 0b10)
    assert feat.empty_shells.tolist() == [False]
    sizes = [s.size for s in shell_masks(4, 0, 0b1001)]
    assert sizes == [4, 5, 4]  # weight-2 shell loses alpha itself


def test_feature_extraction_deterministic():
    f = random_function(5, 1)
    smp = sample_surrogate(f, DEPH, 0b10011, 0, 50.0, "sectors", 3)
    a = extract_features(smp, 0, 0b10011).values
    b = extract_features(smp, 0, 0b10011).values
    assert np.array_equal(a, b)


def test_baseline_equals_single_element():
    a = 0b11011
    for s in range(200):
        f = random_function(5, s)
        smp = sample_surrogate(f, DEPH, a, 0, 40.0, "sectors", s)
        assert baseline_classifier(smp, 0, a).bit == single_element_decode(smp, 0, a, 0).bit
    smp = sample_surrogate(random_function(5, 0), CLEAN, a, 0, np.inf, "sectors", 0)
    assert baseline_classifier(smp, 0, a).bit == target_bit(random_function(5, 0), 0, a)


def _separable(n, gen):
    lab = np.tile([0, 1], n // 2)
    x = gen.standard_normal((n, 2)) * 0.3
    x[:, 0] += np.where(lab == 1, 2.0, -2.0)
    return x, lab


def test_train_separable(gen):
    x, lab = _separable(1000, gen)
    res = train(x, lab, TrainConfig(), 0)
    assert res.val_accuracy >= 0.99
    assert len(res.loss_history) == 100


def test_train_no_signal():
    x = np.zeros((2000, 4))
    lab = np.tile([0, 1], 1000)
    res = train(x, lab, TrainConfig(), 1)
    n_val = res.val_idx.size
    assert abs(res.val_accuracy - 0.5) < 3 * np.sqrt(0.25 / n_val)


def test_shuffled_labels_control(gen):
    x, lab = _separable(2000, gen)
    res = train(x, gen.permutation(lab), TrainConfig(), 2)
    assert abs(res.val_accuracy - 0.5) < 3 * np.sqrt(0.25 / res.val_idx.size)


def test_full_batch_loss_non_increasing(gen):
    x, lab = _separable(400, gen)
    x[:, 1] += 0.5 * gen.standard_normal(400)
    res = train(x, lab, TrainConfig(optimizer="gd", learning_rate=0.1, epochs=200), 0)
    h = np.array(res.loss_history)
    assert np.all(np.diff(h) <= 1e-12)
    adam = train(x, lab, TrainConfig(), 0).loss_history
    assert adam[-1] < adam[0]


def test_train_rejections(gen):
    x, lab = _separable(100, gen)
    with pytest.raises(ValueError):
        train(x, np.r_[lab[:-1], 0], TrainConfig(), 0)
    with pytest.raises(ValueError):
        train(x[:2], lab[:2], TrainConfig(train_fraction=1.0), 0)
    with pytest.raises(ValueError):
        train(x, lab, TrainConfig(optimizer="lbfgs"), 0)


def test_normalization_uses_training_split_only(gen):
    x, lab = _separable(500, gen)
    res = train(x, lab, TrainConfig(epochs=5), 0)
    assert np.allclose(res.model.mean, x[res.train_idx].mean(axis=0))
    assert np.allclose(res.model.std, x[res.train_idx].std(axis=0))
    assert not np.allclose(res.model.mean, x.mean(axis=0))
    assert set(res.train_idx).isdisjoint(res.val_idx)


def test_degenerate_feature_guard(gen):
    x, lab = _separable(200, gen)
    x = np.c_[x, np.ones(200)]
    res = train(x, lab, TrainConfig(epochs=5), 0)
    assert res.model.std[2] == 1.0


def test_model_json_roundtrip(gen):
    x, lab = _separable(200, gen)
    m = train(x, lab, TrainConfig(epochs=3), 0).model
    m2 = LogisticModel.from_json(m.to_json())
    assert np.allclose(m.score(x), m2.score(x))
    with pytest.raises(ValueError):
        LogisticModel([1.0], 0.0, [0.0], [0.0])


def test_training_reproducible(gen):
    x, lab = _separable(300, gen)
    a = train(x, lab, TrainConfig(epochs=4), 9)
    b = train(x, lab, TrainConfig(epochs=4), 9)
    assert np.array_equal(a.model.weights, b.model.weights)


def test_make_dataset_balanced():
    x, lab, base = make_dataset(5, concept_for_rule(5, "full"), DEPH, 1e3, 40, "paired", 0)
    assert x.shape == (40, 11) and lab.sum() == 20 and base.shape == (40,)
    with pytest.raises(ValueError):
        make_dataset(5, concept_for_rule(5, "full"), DEPH, 1e3, 41)


def test_trained_beats_baseline_trend():
    n = 8
    a = concept_for_rule(n, "full")
    gaps = []
    for k in (2.4, 2.8, 3.2):
        x, lab, base = make_dataset(n, a, DEPH, 2.0 ** (k * n), 2000, "paired", int(k * 10))
        res = train(x, lab, TrainConfig(), 0)
        va = res.val_idx
        gaps.append(res.val_accuracy - np.mean(base[va] == lab[va]))
    gen = np.random.default_rng(0)
    boot = [np.mean(gen.choice(gaps, len(gaps))) for _ in range(2000)]
    assert np.quantile(boot, 0.05) >= 0.0
