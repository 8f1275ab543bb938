"""Accuracy curves over k = log2(n_c) / n_q and their threshold crossings."""
from dataclasses import dataclass, field

import numpy as np

__all__ = ["AccuracyCurve", "Crossing", "threshold_crossing", "crossings_many", "T_GRID"]

T_GRID = np.round(np.arange(0.51, 0.9701, 0.02), 2)

LEFT = "left"
RIGHT = "right"


@dataclass
class AccuracyCurve:
    """Mean accuracy on a k grid; ``replicates`` holds independent repetitions row-wise."""

    k: np.ndarray
    accuracy: np.ndarray
    n_q: int
    meta: dict = field(default_factory=dict)
    replicates: np.ndarray | None = None

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=float)
        self.accuracy = np.asarray(self.accuracy, dtype=float)
        if self.k.ndim != 1 or self.k.shape != self.accuracy.shape:
            raise ValueError("k and accuracy must be 1-d and aligned")
        if self.k.size < 2 or np.any(np.diff(self.k) <= 0):
            raise ValueError("k grid must be strictly increasing with at least two points")
        if np.any((self.accuracy < 0) | (self.accuracy > 1)):
            raise ValueError("accuracies must lie in [0, 1]")
        if self.replicates is not None:
            self.replicates = np.atleast_2d(np.asarray(self.replicates, dtype=float))
            if self.replicates.shape[1] != self.k.size:
                raise ValueError("replicate curves must share the k grid")

    @classmethod
    def from_replicates(cls, k, replicates, n_q, meta=None) -> "AccuracyCurve":
        reps = np.atleast_2d(np.asarray(replicates, dtype=float))
        return cls(k, reps.mean(axis=0), n_q, dict(meta or {}), reps)


@dataclass(frozen=True)
class Crossing:
    k: float  # nan when censored
    censor: str | None = None

    @property
    def ok(self) -> bool:
        return self.censor is None


def threshold_crossing(k, accuracy, T: float) -> Crossing:
    """Smallest k where the running-maximum curve reaches T, by linear inversion."""
    if not 0.5 < T < 1.0:
        raise ValueError("threshold must lie in (0.5, 1)")
    k = np.asarray(k, dtype=float)
    a = np.maximum.accumulate(np.asarray(accuracy, dtype=float))
    if a[0] >= T:
        return Crossing(float("nan"), LEFT)
    if a[-1] < T:
        return Crossing(float("nan"), RIGHT)
    j = int(np.argmax(a >= T))  # first index at or above T; a[j-1] < T
    lo, hi = a[j - 1], a[j]
    return Crossing(float(k[j - 1] + (T - lo) / (hi - lo) * (k[j] - k[j - 1])))


def crossings_many(k, curves, thresholds) -> np.ndarray:
    """Vectorized crossings for curves (n_curves, n_k) and thresholds (n_T,).

    Returns (n_curves, n_T) with nan where censored on either side.
    """
    k = np.asarray(k, dtype=float)
    a = np.maximum.accumulate(np.atleast_2d(np.asarray(curves, dtype=float)), axis=1)
    t = np.asarray(thresholds, dtype=float)
    above = a[:, None, :] >= t[None, :, None]
    j = np.argmax(above, axis=2)
    found = above.any(axis=2) & (j > 0)
    jj = np.clip(j, 1, k.size - 1)
    rows = np.arange(a.shape[0])[:, None]
    lo = a[rows, jj - 1]
    hi = a[rows, jj]
    with np.errstate(divide="ignore", invalid="ignore"):
        kx = k[jj - 1] + (t[None, :] - lo) / (hi - lo) * (k[jj] - k[jj - 1])
    return np.where(found, kx, np.nan)
