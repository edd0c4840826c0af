from typing import Callable, Tuple

import numpy as np


def central_difference(func: Callable[[float], float], x: float, step: float) -> float:
    """Symmetric finite-difference derivative of func at x."""
    return (func(x + step) - func(x - step)) / (2.0 * step)


def scan_root(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    points: int = 401,
    width: float = 1e-12,
) -> float:
    """First sign change of func on [lo, hi], narrowed by repeated dense grid scans."""

    while hi - lo > width:
        grid = np.linspace(lo, hi, points)
        values = np.array([func(x) for x in grid])
        signs = np.sign(values)
        exact = np.flatnonzero(values == 0.0)
        if exact.size:
            return float(grid[exact[0]])
        changes = np.flatnonzero(signs[:-1] != signs[1:])
        if not changes.size:
            raise AssertionError(f"No sign change on [{lo}, {hi}].")
        index = changes[0]
        new_lo, new_hi = grid[index], grid[index + 1]
        if (new_lo, new_hi) == (lo, hi):
            break
        lo, hi = new_lo, new_hi
    return 0.5 * (lo + hi)


def scan_minimum(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    points: int = 401,
    rounds: int = 12,
) -> Tuple[float, float]:
    """Location and value of the minimum of func on [lo, hi] by zooming grid scans."""

    for _ in range(rounds):
        grid = np.linspace(lo, hi, points)
        values = np.array([func(x) for x in grid])
        index = int(np.argmin(values))
        lo = grid[max(index - 1, 0)]
        hi = grid[min(index + 1, points - 1)]
    x = 0.5 * (lo + hi)
    return float(x), float(func(x))
