import math

import numpy as np

# Rates closer than this are treated as tied (persistence ordering in the multi-dimensional solver).
KAPPA_EPS = 1e-8

# Below this |a*h| the limit h is exact in double precision (the relative error is about
# |a*h|/2), and it sidesteps precision loss when a*h is subnormal.
_TINY = 1e-200


def growth(a: float, h):
    """Return (exp(a*h) - 1) / a, with the a = 0 limit h.

    expm1 keeps full relative accuracy for small ``a*h``, so no rate cutoff is needed.
    Accepts a scalar or an array ``h``.
    """
    if np.ndim(h) == 0:
        x = a * h
        return h if abs(x) < _TINY else math.expm1(x) / a
    h = np.asarray(h, dtype=float)
    x = a * h
    tiny = np.abs(x) < _TINY
    if tiny.all():
        return h.copy()
    return np.where(tiny, h, np.expm1(x) / (a if a != 0 else 1.0))


def pos(x: float) -> float:
    return x if x > 0.0 else 0.0
