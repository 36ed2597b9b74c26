"""Pure-Python (NumPy) fallback for the Grünwald-Letnikov kernel.

Mirrors the compiled extension's interface; uses ``np.longdouble`` so the
weight recurrence and the convolution accumulate in extended precision,
matching the compiled kernel's long-double accumulators.
"""

import numpy as np


def gl_weights(alpha: float, out: np.ndarray) -> None:
    n = out.shape[0]
    if n == 0:
        return
    i = np.arange(1, n, dtype=np.longdouble)
    ratios = 1.0 - (np.longdouble(alpha) + 1.0) / i
    out[0] = 1.0
    out[1:] = np.cumprod(ratios).astype(np.float64)


def gl_convolve(w: np.ndarray, f: np.ndarray, out: np.ndarray,
                window: int) -> None:
    n = f.shape[0]
    wl = w[:window].astype(np.longdouble)
    fl = f.astype(np.longdouble)
    out[:] = np.convolve(wl, fl)[:n].astype(np.float64)
