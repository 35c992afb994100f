"""Pure numpy versions of the stepping kernels.

Used when the compiled extension is unavailable or when ``DTQW_LAB_PURE=1``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def walk_steps(up, down, coin, phase, steps: int, ct: bool = False):
    u = np.array(up, dtype=np.complex128, copy=True)
    d = np.array(down, dtype=np.complex128, copy=True)
    if u.shape != d.shape:
        raise ValueError("component length mismatch")
    c11, c12, c21, c22 = (complex(c) for c in coin)
    ph = None
    if phase is not None:
        ph = np.asarray(phase, dtype=np.complex128)
        if ph.shape != u.shape:
            raise ValueError("phase length does not match lattice")
    nu = np.empty_like(u)
    nd = np.empty_like(d)
    for _ in range(steps):
        if ct:
            # shift first: u(x-1) feeds site x, d(x+1) feeds site x
            su = np.roll(u, 1)
            sd = np.roll(d, -1)
            np.add(c11 * su, c12 * sd, out=nu)
            np.add(c21 * su, c22 * sd, out=nd)
        else:
            cu = c11 * u + c12 * d
            cd = c21 * u + c22 * d
            nu[1:] = cu[:-1]
            nu[0] = cu[-1]
            nd[:-1] = cd[1:]
            nd[-1] = cd[0]
        if ph is not None:
            nu *= ph
            nd *= ph
        u, nu = nu, u
        d, nd = nd, d
    return u, d


def dirac_steps(up, down, a: float, b: float, steps: int):
    u = np.array(up, dtype=np.complex128, copy=True)
    d = np.array(down, dtype=np.complex128, copy=True)
    if u.shape != d.shape:
        raise ValueError("component length mismatch")
    for _ in range(steps):
        nu = a * np.roll(u, 1) - b * d
        nd = a * np.roll(d, -1) + b * u
        u, d = nu, nd
    return u, d
