"""Frame standardisation, Gaussian blur and the blurred image distance.

``dist(u, v) = || blur(normalize(u) - normalize(v)) ||`` with the plain
Euclidean norm over pixels. Normalisation comes first, then the blur.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_frame, check_frames, check_positive, check_same_shape
from .errors import EmptyList, KernelTooLarge

DEFAULT_SIGMA = 1.5
_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Kernel:
    sigma: float
    taps: np.ndarray

    @property
    def radius(self) -> int:
        return self.taps.shape[0] // 2

    @property
    def taps_1d(self) -> np.ndarray:
        # the 2-D kernel is an outer product; its row sums recover the 1-D taps
        return self.taps.sum(axis=1)

    @classmethod
    def identity(cls):
        return cls(0.0, np.ones((1, 1)))


def gaussian_kernel(sigma=DEFAULT_SIGMA) -> Kernel:
    """Separable Gaussian with radius ``ceil(3 * sigma)``, taps summing to 1."""
    check_positive(sigma, "sigma")
    k = math.ceil(3 * sigma)
    x = np.arange(-k, k + 1, dtype=float)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    g /= g.sum()
    taps = np.outer(g, g)
    return Kernel(float(sigma), taps / taps.sum())


def normalize(f):
    """Subtract the mean and divide by the population std; constant frames map to zeros."""
    f = np.asarray(f, dtype=float)
    std = f.std()
    if std < _STD_FLOOR:
        return np.zeros_like(f)
    return (f - f.mean()) / std


def blur(f, kern: Kernel):
    """2-D convolution with ``kern`` using replicated (edge-clamped) borders."""
    f = np.asarray(f, dtype=float)
    size = kern.taps.shape[0]
    if size > min(f.shape[-2:]):
        raise KernelTooLarge(f"kernel of size {size} exceeds frame {f.shape[-2:]}")
    if size == 1:
        return f * kern.taps[0, 0]
    g = kern.taps_1d
    out = correlate1d(f, g, axis=-2, mode="nearest")
    return correlate1d(out, g, axis=-1, mode="nearest")


def dist(u, v, kern: Kernel) -> float:
    u, v = check_frame(u, "u"), check_frame(v, "v")
    check_same_shape(u, v)
    return float(np.linalg.norm(blur(normalize(u) - normalize(v), kern)))


def average(frames):
    """Pixelwise mean of a non-empty list of equally-shaped frames."""
    if len(frames) == 0:
        raise EmptyList("cannot average an empty list of frames")
    return check_frames(frames).mean(axis=0)


class BlurredStandardizer(TransformerMixin, BaseEstimator):
    """Map frames to ``blur(normalize(frame))``.

    Because the blur is linear, ``dist(u, v)`` equals the Euclidean distance
    between the transformed frames, which lets callers transform a target once
    and compare many candidates against it.
    """

    def __init__(self, sigma=DEFAULT_SIGMA):
        self.sigma = sigma

    def fit(self, X=None, y=None):
        self.kernel_ = gaussian_kernel(self.sigma)
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 2
        X = X[None] if single else X
        mean = X.mean(axis=(1, 2), keepdims=True)
        std = X.std(axis=(1, 2), keepdims=True)
        safe = np.where(std < _STD_FLOOR, 1.0, std)
        Z = np.where(std < _STD_FLOOR, 0.0, (X - mean) / safe)
        out = blur(Z, self.kernel_)
        return out[0] if single else out

    def distance(self, u, v) -> float:
        return float(np.linalg.norm(self.transform(u) - self.transform(v)))


# ---------------------------------------------------------------------------
# binary PGM (P5), 8-bit


def quantize(f):
    """Round a [0, 1] frame to the 8-bit grid used on disk."""
    return np.round(np.clip(f, 0.0, 1.0) * 255.0) / 255.0


def write_pgm(path, f):
    f = check_frame(f)
    data = np.round(np.clip(f, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = data.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + data.tobytes())


def read_pgm(path):
    raw = Path(path).read_bytes()
    parts = []
    pos = 0
    # header: magic, width, height, maxval separated by whitespace; '#' comments allowed
    while len(parts) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        parts.append(raw[pos:end])
        pos = end
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    pos += 1
    body = raw[pos:pos + w * h]
    if len(body) != w * h:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w) / 255.0
