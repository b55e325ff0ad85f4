"""Pure-NumPy fallback for the right-hand-side kernel.

Mirrors ``_kernels.pyx`` operation for operation: the convolution accumulates
in ascending shift order per cell and the terms combine in the same sequence,
so the two backends agree bitwise on IEEE-754 hardware.
"""

from __future__ import annotations

import numpy as np


def rhs_kernel(u, weights, dx, nu, c, theta, m0, m1, flux_kind, dt_ref):
    n = u.shape[0]
    nw = weights.shape[0]
    inv_dx = 1.0 / dx
    lap_c = nu / (dx * dx)
    conv_c = c / (theta * theta)
    trans_c = c * m1 / (theta * dx)

    upad = np.zeros(n + 2)
    upad[1:-1] = u
    a = upad[:-1]
    b = upad[1:]
    if flux_kind == 0:
        g = (a * (a - np.abs(a))) * 0.25 + (b * (b + np.abs(b))) * 0.25
    else:
        q = dx / (4.0 * dt_ref)
        g = (a * a + b * b) * 0.25 + q * (b - a)

    out = (g[1:] - g[:-1]) * inv_dx + lap_c * ((upad[:-2] - 2.0 * u) + upad[2:])

    conv = np.zeros(n)
    for m in range(1, min(nw, n - 1) + 1):
        conv[m:] += weights[m - 1] * u[:-m]
    out += conv_c * (conv - m0 * u)
    out += trans_c * (upad[2:] - u)
    return out
