"""Bracketing scans and golden-section refinement for smooth 1-D objectives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScalarMin:
    x: float
    fx: float
    iterations: int
    boundary: bool = False


def golden_section(f, lo: float, hi: float, xtol: float = 1e-10, max_iter: int = 500) -> ScalarMin:
    """Minimize a unimodal ``f`` on [lo, hi]."""
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while abs(b - a) > xtol * max(1.0, abs(a) + abs(b)) and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    if fc <= fd:
        return ScalarMin(c, fc, it)
    return ScalarMin(d, fd, it)


def scan_and_refine(f, grid, xtol: float = 1e-10) -> tuple[ScalarMin, np.ndarray]:
    """Evaluate ``f`` on ``grid``, bracket the smallest value and refine it.

    Returns the refined minimum and the grid values. If the smallest grid
    value sits on either end of the grid the result carries ``boundary=True``
    and is not refined.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.array([f(x) for x in grid], dtype=float)
    values = np.where(np.isnan(values), np.inf, values)
    i = int(np.argmin(values))
    if len(grid) < 3 or i == 0 or i == len(grid) - 1:
        return ScalarMin(float(grid[i]), float(values[i]), 0, boundary=True), values
    res = golden_section(f, grid[i - 1], grid[i + 1], xtol=xtol)
    if res.fx > values[i]:
        res = ScalarMin(float(grid[i]), float(values[i]), res.iterations)
    return res, values
