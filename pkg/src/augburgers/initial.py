"""Built-in initial data for the experiment harness."""

from __future__ import annotations

import math

import numpy as np

from .grid import Grid, GridFunction, PiecewiseInitial

__all__ = ["sine_bumps", "gaussian", "box_pair", "from_file"]


def sine_bumps() -> PiecewiseInitial:
    """Default experiment datum: two sine arcs of opposite sign.

    ``-sin(x/2)/10`` on [-pi, 0] (a positive bump of mass 0.2) and
    ``-sin(2x)/20`` on [0, pi/2] (a negative dip of mass -0.05); zero
    elsewhere.  Total mass 0.15, sup norm 0.1, with a jump at x = -pi.
    """
    return PiecewiseInitial(
        pieces=(
            (-math.pi, 0.0, lambda x: -0.1 * np.sin(0.5 * x)),
            (0.0, 0.5 * math.pi, lambda x: -0.05 * np.sin(2.0 * x)),
        )
    )


def gaussian(total_mass: float, width: float):
    """Gaussian of prescribed integral ``total_mass`` and standard deviation ``width``."""
    if not width > 0.0:
        raise ValueError(f"width must be positive, got {width}")
    amp = total_mass / (width * math.sqrt(2.0 * math.pi))

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        return amp * np.exp(-(x * x) / (2.0 * width * width))

    return f


def box_pair(
    h1: float, a1: float, b1: float, h2: float, a2: float, b2: float
) -> PiecewiseInitial:
    """Sum of two indicator boxes: ``h1 on [a1, b1]`` plus ``h2 on [a2, b2]``.

    The boxes must not overlap (shared endpoints are fine).
    """
    if not (a1 < b1 and a2 < b2):
        raise ValueError("each box needs a nonempty interval")
    lo, hi = sorted(((a1, b1), (a2, b2)))
    if lo[1] > hi[0]:
        raise ValueError("boxes must not overlap")
    return PiecewiseInitial(
        pieces=(
            (a1, b1, lambda x: np.full_like(np.asarray(x, float), h1)),
            (a2, b2, lambda x: np.full_like(np.asarray(x, float), h2)),
        )
    )


def from_file(path: str, grid: Grid) -> GridFunction:
    """Load cell values (one float per line, ``#`` comments) onto ``grid``."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            try:
                values.append(float(body))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: expected one float per line, got {body!r}"
                ) from None
    if len(values) != grid.num_cells:
        raise ValueError(
            f"{path}: {len(values)} values for a grid of {grid.num_cells} cells"
        )
    return GridFunction(grid, np.asarray(values))
