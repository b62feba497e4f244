"""Input validation helpers shared by the estimators and free functions."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array, check_scalar

from .errors import DimensionMismatch


def check_positive(value, name, *, integer=False):
    target = numbers.Integral if integer else numbers.Real
    return check_scalar(value, name, target, min_val=0, include_boundaries="neither")


def check_frame(frame, name="frame"):
    """Return ``frame`` as a finite 2-D float64 array."""
    return check_array(frame, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                       ensure_min_features=1, input_name=name)


def check_frames(frames):
    """Stack a sequence of equally-shaped frames into an (n, H, W) array."""
    arrays = [check_frame(f) for f in frames]
    shape = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != shape:
            raise DimensionMismatch(f"frame shapes differ: {shape} vs {a.shape}")
    return np.stack(arrays)


def check_same_shape(u, v):
    if u.shape != v.shape:
        raise DimensionMismatch(f"frame shapes differ: {u.shape} vs {v.shape}")
