"""Hamming-shell features of the shadow sectors and a from-scratch logistic classifier."""
import json
from dataclasses import dataclass, field

import numpy as np

from ..bits import popcount
from ..noise import NoiseChannelSpec
from ..phase_states import BooleanFunction, Concept, random_function
from ..rng import as_generator, as_source
from ..shadows import SurrogateSectorSample, sample_surrogate
from .spectral import MfPrediction, _alpha_int

__all__ = [
    "ShellFeatures", "LogisticModel", "TrainConfig", "TrainResult", "extract_features",
    "baseline_classifier", "train", "make_dataset", "shell_masks",
]

VARIANTS = ("baseline", "paired")
STD_GUARD = 1e-12


@dataclass
class ShellFeatures:
    values: np.ndarray
    variant: str
    empty_shells: np.ndarray

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        n_expected = self.values.size
        n_q = n_expected - 2 if self.variant == "baseline" else (n_expected - 1) // 2
        if self.empty_shells.size != n_q - 1:
            raise ValueError("feature length does not match variant")


def shell_masks(n_q: int, y: int, alpha: int):
    """Index arrays of the shells of weight 1 .. n_q-1 with both anchors removed."""
    t = np.arange(1 << n_q)
    w = popcount(t)
    keep = (t != y) & (t != (y ^ alpha))
    return [t[(w == k) & keep] for k in range(1, n_q)]


def extract_features(sample: SurrogateSectorSample, y, alpha, variant: str = "paired") -> ShellFeatures:
    """Anchors (d_{y^a}, d_y, Re r_y) followed by per-shell averages of row-column products.

    Shells are indexed by the weight of t, which is the Hamming distance
    to y only in the gauge y = 0, so other y are rejected.
    """
    a = _alpha_int(alpha)
    y = int(y)
    if y != 0:
        raise ValueError("shell features are defined in the gauge y = 0")
    sample.require("row", "col", "diag")
    n_q = sample.n_q
    anchors = [sample.diag[y ^ a], sample.diag[y], np.real(sample.row[y])]
    rr, ii, empty = [], [], []
    for shell in shell_masks(n_q, y, a):
        if shell.size == 0:
            rr.append(0.0)
            ii.append(0.0)
            empty.append(True)
            continue
        r = sample.row[shell]
        c = sample.col[shell]
        rr.append(float(np.mean(r.real * c.real)))
        ii.append(float(np.mean(r.imag * c.imag)))
        empty.append(False)
    if variant == "baseline":
        vals = anchors + rr
    elif variant == "paired":
        vals = anchors + rr + ii
    else:
        raise ValueError(f"variant must be one of {VARIANTS}")
    return ShellFeatures(np.array(vals, dtype=float), variant, np.array(empty, dtype=bool))


def baseline_classifier(sample: SurrogateSectorSample, y, alpha) -> MfPrediction:
    """Predict b = 1 when Re r_y <= 0."""
    sample.require("row")
    val = float(np.real(sample.row[int(y)]))
    return MfPrediction(int(val <= 0), val * (1 << sample.n_q), "baseline")


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.mean = np.asarray(self.mean, dtype=float)
        self.std = np.asarray(self.std, dtype=float)
        if not (self.weights.shape == self.mean.shape == self.std.shape):
            raise ValueError("inconsistent model dimensions")
        if np.any(self.std <= 0):
            raise ValueError("standardization scales must be positive")

    def score(self, x) -> np.ndarray:
        z = (np.atleast_2d(x) - self.mean) / self.std
        return z @ self.weights + self.intercept

    def predict_proba(self, x) -> np.ndarray:
        return _sigmoid(self.score(x))

    def predict(self, x) -> np.ndarray:
        return (self.score(x) > 0).astype(np.int64)

    def to_json(self) -> str:
        return json.dumps({
            "weights": self.weights.tolist(), "intercept": self.intercept,
            "mean": self.mean.tolist(), "std": self.std.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "LogisticModel":
        d = json.loads(text)
        return cls(np.array(d["weights"]), float(d["intercept"]), np.array(d["mean"]), np.array(d["std"]))


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adam"  # or "gd" (full batch)
    batch_size: int = 256
    learning_rate: float = 1e-2
    l2: float = 1e-3
    epochs: int = 100
    train_fraction: float = 0.8
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    require_balanced: bool = True


@dataclass
class TrainResult:
    model: LogisticModel
    val_accuracy: float
    train_accuracy: float
    loss_history: list = field(default_factory=list)
    train_idx: np.ndarray | None = None
    val_idx: np.ndarray | None = None


def _sigmoid(s):
    return 0.5 * (1.0 + np.tanh(0.5 * s))


def _loss_grad(w, b0, x, lab, l2):
    s = x @ w + b0
    # log(1 + e^s) - lab * s, written stably
    loss = float(np.mean(np.logaddexp(0.0, s) - lab * s) + 0.5 * l2 * w @ w)
    err = _sigmoid(s) - lab
    gw = x.T @ err / lab.size + l2 * w
    gb = float(err.mean())
    return loss, gw, gb


def train(features, labels, config: TrainConfig = TrainConfig(), rng=0) -> TrainResult:
    """Fit the l2-regularized logistic model; normalization uses the training split only."""
    x = np.asarray(features, dtype=float)
    lab = np.asarray(labels, dtype=float)
    if x.ndim != 2 or x.shape[0] != lab.size:
        raise ValueError("features must be (n_samples, n_features) aligned with labels")
    if not set(np.unique(lab)) <= {0.0, 1.0}:
        raise ValueError("labels must be 0/1")
    if config.require_balanced and 2 * int(lab.sum()) != lab.size:
        raise ValueError("dataset must contain equal numbers of both labels")
    gen = as_generator(rng)
    perm = gen.permutation(lab.size)
    n_tr = int(round(config.train_fraction * lab.size))
    tr, va = perm[:n_tr], perm[n_tr:]
    if tr.size == 0 or va.size == 0:
        raise ValueError("empty train or validation split")
    mean = x[tr].mean(axis=0)
    std = x[tr].std(axis=0)
    std = np.where(std > STD_GUARD, std, 1.0)
    xt = (x[tr] - mean) / std
    yt = lab[tr]
    d = x.shape[1]
    w = np.zeros(d)
    b0 = 0.0
    history = []
    if config.optimizer == "gd":
        for _ in range(config.epochs):
            loss, gw, gb = _loss_grad(w, b0, xt, yt, config.l2)
            history.append(loss)
            w -= config.learning_rate * gw
            b0 -= config.learning_rate * gb
    elif config.optimizer == "adam":
        m = np.zeros(d + 1)
        v = np.zeros(d + 1)
        step = 0
        for _ in range(config.epochs):
            order = gen.permutation(tr.size)
            for lo in range(0, tr.size, config.batch_size):
                batch = order[lo:lo + config.batch_size]
                _, gw, gb = _loss_grad(w, b0, xt[batch], yt[batch], config.l2)
                g = np.append(gw, gb)
                step += 1
                m = config.beta1 * m + (1 - config.beta1) * g
                v = config.beta2 * v + (1 - config.beta2) * g * g
                mh = m / (1 - config.beta1 ** step)
                vh = v / (1 - config.beta2 ** step)
                upd = config.learning_rate * mh / (np.sqrt(vh) + config.adam_eps)
                w -= upd[:d]
                b0 -= upd[d]
            history.append(_loss_grad(w, b0, xt, yt, config.l2)[0])
    else:
        raise ValueError("optimizer must be 'adam' or 'gd'")
    model = LogisticModel(w, b0, mean, std)
    val_acc = float(np.mean(model.predict(x[va]) == lab[va]))
    tr_acc = float(np.mean(model.predict(x[tr]) == lab[tr]))
    return TrainResult(model, val_acc, tr_acc, history, tr, va)


def _balanced_function(n_q: int, alpha: int, label: int, rng) -> BooleanFunction:
    f = random_function(n_q, rng)
    if (f.table[0] ^ f.table[alpha]) != label:
        t = f.table.copy()
        t[alpha] ^= 1
        f = BooleanFunction(t, n_q)
    return f


def make_dataset(n_q: int, alpha, prep: NoiseChannelSpec, n_c, n_samples: int = 2000,
                 variant: str = "paired", rng=0):
    """Balanced labeled features at y = 0, plus the baseline predictions for the same samples.

    Returns (X, labels, baseline_bits).
    """
    if n_samples < 2 or n_samples % 2:
        raise ValueError("n_samples must be a positive even number")
    a = _alpha_int(alpha)
    Concept(a, n_q)
    src = as_source(rng)
    labels = np.tile([0, 1], n_samples // 2)
    rows = []
    base = np.empty(n_samples, dtype=np.int64)
    for i, lab in enumerate(labels):
        s_i = src.child(i)
        f = _balanced_function(n_q, a, int(lab), s_i.child(0))
        smp = sample_surrogate(f, prep, a, 0, n_c, "sectors", s_i.child(1))
        rows.append(extract_features(smp, 0, a, variant).values)
        base[i] = baseline_classifier(smp, 0, a).bit
    return np.vstack(rows), labels, base
