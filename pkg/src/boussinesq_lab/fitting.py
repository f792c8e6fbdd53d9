"""Log-log power-law fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerFit:
    slope: float
    intercept: float  # log of the prefactor
    residuals: tuple

    @property
    def constant(self) -> float:
        return float(np.exp(self.intercept))


def loglog_fit(x, y) -> PowerFit:
    """Least-squares fit of log y = intercept + slope log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("loglog_fit needs >= 2 strictly positive points")
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (icpt + slope * lx)
    return PowerFit(float(slope), float(icpt), tuple(float(r) for r in res))


def decades(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.log10(x.max() / x.min()))
