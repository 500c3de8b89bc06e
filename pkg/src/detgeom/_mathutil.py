import numpy as np


def log_softmax(z, axis=-1):
    """Normalise log-weights along ``axis`` with max subtraction."""
    z = np.asarray(z, dtype=float)
    zmax = np.max(z, axis=axis, keepdims=True)
    zmax = np.where(np.isfinite(zmax), zmax, 0.0)
    shifted = z - zmax
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


def softmax(z, axis=-1):
    return np.exp(log_softmax(z, axis=axis))


def fmt(x):
    """Fixed 9-significant-digit decimal used by every text artifact."""
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    s = f"{x:.9g}"
    if not any(c in s for c in ".einf"):
        s += ".0"
    return s
