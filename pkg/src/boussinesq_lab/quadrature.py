"""Gauss-Legendre panel quadrature with panels sized to the local phase rate."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureBudgetError(RuntimeError):
    """The requested integral needs more panels than the budget allows."""


@lru_cache(maxsize=16)
def gl_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, order: int = 8):
    """Nodes and weights of composite Gauss-Legendre on consecutive edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = gl_rule(order)
    h = np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + 0.5 * h[:, None] * x).ravel()
    weights = (0.5 * h[:, None] * w).ravel()
    return nodes, weights


def oscillatory_edges(a: float, b: float, rate, *, max_phase: float = np.pi / 2,
                      max_width: float = np.inf, breakpoints=(), pre_cells: int = 256,
                      max_panels: int = 2_000_000) -> np.ndarray:
    """Panel edges on [a, b] such that each panel sees at most ``max_phase``.

    ``rate`` is a callable bound on |phase'| (or a constant).  The bound on a
    pre-grid cell is the larger endpoint value, which is exact for rates that
    are monotone inside each cell.
    """
    if not b > a:
        return np.array([a, b], dtype=float)
    cuts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        pre = np.linspace(lo, hi, pre_cells + 1)
        if callable(rate):
            r = np.abs(np.asarray(rate(pre), dtype=float))
            cell = np.maximum(r[:-1], r[1:])
        else:
            cell = np.full(pre_cells, abs(float(rate)))
        width = np.diff(pre)
        n_sub = np.ceil(np.maximum(cell * width / max_phase, width / max_width))
        n_sub = np.maximum(n_sub, 1).astype(np.int64)
        if n_sub.sum() + sum(p.size for p in pieces) > max_panels:
            raise QuadratureBudgetError(
                f"panel budget {max_panels} exceeded (need {int(n_sub.sum())})")
        start = np.repeat(pre[:-1], n_sub)
        step = np.repeat(width / n_sub, n_sub)
        offs = np.arange(n_sub.sum()) - np.repeat(np.cumsum(n_sub) - n_sub, n_sub)
        pieces.append(start + offs * step)
    pieces.append(np.array([b]))
    return np.concatenate(pieces)


def oscillatory_rule(a, b, rate, order: int = 8, **kw):
    return panel_nodes(oscillatory_edges(a, b, rate, **kw), order)
