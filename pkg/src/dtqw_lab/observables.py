"""Position statistics, the one-step displacement operator and Zitterbewegung.

For ``U = T C`` the Heisenberg displacement ``U^dag X U - X`` reduces to the
position-independent coin operator ``C^dag sigma_z C``. Its expectation in a
state with band amplitudes ``f_pm(k)`` splits into a constant drift ``A`` and
an oscillating cross-band part ``B(t)`` that beats at ``E_+(k) - E_-(k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .coin import CoinMatrix, CoinSpec
from .evolution import StepConfig, _advance
from .spectral import (
    BandWeights,
    band_eigenvalues,
    band_eigenvectors,
    re_lambda,
)
from .state import WalkerState, dft, position_distribution

SEAM_TOL = 1e-8
OSCILLATION_TOL = 1e-10

class SeamError(ValueError):
    """Probability has spread too close to the point opposite the packet on the ring."""


class NoOscillationError(ValueError):
    """The series has no oscillating component (single-band input)."""


@dataclass(frozen=True, eq=False)
class DeltaXOperator:
    matrix: np.ndarray = field(repr=False)
    spacing: float = 1.0

    def expectation(self, spinors: np.ndarray) -> np.ndarray:
        """``<c|dX|c>`` for spinors of shape ``(..., 2)``."""
        return np.real(np.einsum("...i,ij,...j->...", np.conj(spinors), self.matrix, spinors))


def delta_x_operator(coin: CoinMatrix, spacing: float = 1.0) -> DeltaXOperator:
    c = coin.matrix
    if np.max(np.abs(c @ c.conj().T - np.eye(2))) > 1e-12:
        raise ValueError("coin is not unitary")
    ap, bp = c[0, 0], c[0, 1]
    bm, am = c[1, 0], c[1, 1]
    m = np.array(
        [
            [abs(ap) ** 2 - abs(bm) ** 2, np.conj(ap) * bp - am * np.conj(bm)],
            [ap * np.conj(bp) - np.conj(am) * bm, abs(bp) ** 2 - abs(am) ** 2],
        ],
        dtype=np.complex128,
    )
    m = m * spacing
    m.flags.writeable = False
    return DeltaXOperator(m, spacing)


def packet_center(p: np.ndarray) -> int:
    """Site nearest to the circular mean of the distribution ``p``."""
    n = p.size
    z = np.sum(p * np.exp(2j * np.pi * np.arange(n) / n))
    return int(round(np.angle(z) * n / (2 * np.pi))) % n


def unwrapped_offsets(n: int, center: int) -> np.ndarray:
    """Signed site offsets from ``center`` in ``[-n/2, n/2)``."""
    return (np.arange(n) - center + n // 2) % n - n // 2


def mean_position(state: WalkerState, center: int | None = None) -> float:
    """``<X>`` in physical units, measured on the ring cut opposite ``center``.

    ``center`` defaults to the circular mean of the distribution. Raises
    :class:`SeamError` when more than ``SEAM_TOL`` of probability lies within
    ``N/8`` sites of the cut.
    """
    p = position_distribution(state)
    n = p.size
    if center is None:
        center = packet_center(p)
    off = unwrapped_offsets(n, center)
    near_seam = np.abs(off) >= n // 2 - n // 8
    leaked = float(np.sum(p[near_seam]))
    if leaked > SEAM_TOL:
        raise SeamError(
            f"{leaked:.2e} of probability lies within N/8 of the ring seam (limit {SEAM_TOL:g})"
        )
    return float((center + np.dot(p, off)) * state.lattice.spacing)


@dataclass(frozen=True, eq=False)
class ZitterSeries:
    times: np.ndarray
    values: np.ndarray
    A: float
    B: np.ndarray = field(repr=False)
    omega_pred: float
    g: np.ndarray | None = field(default=None, repr=False)

    @property
    def amplitude(self) -> float:
        """Largest deviation from the mean (zero for a single-band packet)."""
        return float(np.max(np.abs(self.values - np.mean(self.values))))


def predicted_frequency(spec: CoinSpec, k0: float, dt: float = 1.0) -> float:
    """``|E_+(k0) - E_-(k0)|`` folded into [0, pi/dt]."""
    lp, lm = band_eigenvalues(spec, k0)
    return abs(float(np.angle(lp * np.conj(lm)))) / dt


def _peak_momentum(weights_sq: np.ndarray, k: np.ndarray) -> float:
    return float(k[int(np.argmax(weights_sq))])


def delta_x_series_simulated(initial: WalkerState, cfg: StepConfig, T: int) -> ZitterSeries:
    """``<X>(t+1) - <X>(t)`` for ``t = 0 .. T-1`` by stepping in position space."""
    if cfg.potential is not None and not cfg.potential.is_zero:
        raise ValueError("the displacement series is defined for the free walk only")
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    center = packet_center(position_distribution(initial))
    xs = np.empty(int(T) + 1)
    state = initial
    xs[0] = mean_position(state, center)
    for t in range(1, int(T) + 1):
        state = _advance(state, cfg, 1)
        xs[t] = mean_position(state, center)
    values = np.diff(xs)
    A = float(np.mean(values))
    omega = float("nan")
    if cfg.coin.spec is not None:
        m = dft(initial)
        k0 = _peak_momentum(np.sum(np.abs(m.amplitudes) ** 2, axis=1), m.k)
        omega = predicted_frequency(cfg.coin.spec, k0, initial.lattice.dt)
    return ZitterSeries(np.arange(int(T)), values, A, values - A, omega)


def delta_x_series_analytic(weights: BandWeights, coin_spec: CoinSpec, T: int) -> ZitterSeries:
    """``A + B(t)`` summed over the momentum grid from the band amplitudes."""
    from .coin import build_coin

    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    k = weights.k
    dx_op = delta_x_operator(build_coin(coin_spec), weights.lattice.spacing)
    cp, cm = band_eigenvectors(coin_spec, k)
    lp, lm = band_eigenvalues(coin_spec, k)
    vp = dx_op.expectation(cp)
    vm = dx_op.expectation(cm)
    # g(k) = <c_-|dX|c_+>; the cross term uses its conjugate <c_+|dX|c_->
    g = np.einsum("ki,ij,kj->k", np.conj(cm), dx_op.matrix, cp)
    fp, fm = weights.f_plus, weights.f_minus
    A = float(np.sum(np.abs(fp) ** 2 * vp + np.abs(fm) ** 2 * vm))
    beat = np.angle(np.conj(lp) * lm)
    t = np.arange(int(T))
    coeff = np.conj(fp) * fm * np.conj(g)
    B = 2.0 * np.real(np.exp(1j * np.outer(t, beat)) @ coeff)
    k0 = _peak_momentum(np.abs(fp) ** 2 + np.abs(fm) ** 2, k)
    omega = predicted_frequency(coin_spec, k0, weights.lattice.dt)
    return ZitterSeries(t, A + B, A, B, omega, g)


def estimate_frequency(series, pad: int = 16) -> float:
    """Dominant angular frequency (radians per step) of a displacement series.

    Mean-subtracted, Hann-windowed, zero-padded spectrum; the peak is refined
    by a parabola through the log-magnitudes of the three top bins.
    """
    values = np.asarray(series.values if isinstance(series, ZitterSeries) else series, float)
    n = values.size
    if n < 64:
        raise ValueError(f"need at least 64 samples, got {n}")
    x = values - np.mean(values)
    if np.max(np.abs(x)) < OSCILLATION_TOL:
        raise NoOscillationError("oscillation amplitude below threshold; single-band input?")
    nfft = 1 << int(math.ceil(math.log2(n * pad)))
    spec = np.abs(np.fft.rfft(x * np.hanning(n), nfft))
    i = int(np.argmax(spec[1:])) + 1
    delta = 0.0
    if 1 <= i < spec.size - 1 and np.all(spec[i - 1 : i + 2] > 0):
        lo, mid, hi = np.log(spec[i - 1 : i + 2])
        denom = lo - 2 * mid + hi
        if denom < 0:
            delta = 0.5 * (lo - hi) / denom
    return float(2 * np.pi * (i + delta) / nfft)


def standing_momenta(spec: CoinSpec, tol: float = 1e-15) -> list[float]:
    """Momenta in [-pi, pi) where the group velocity vanishes, by bisection.

    Roots of ``n_z sin(theta/2) cos k - cos(theta/2) sin k``; bracketed on a
    coarse grid first. Returns an empty list for flat bands.
    """
    half = spec.theta / 2
    a = spec.axis[2] * math.sin(half)
    b = math.cos(half)
    if math.hypot(a, b) < 1e-14:
        return []

    def f(k):
        return a * math.cos(k) - b * math.sin(k)

    grid = np.linspace(-math.pi, math.pi, 65)
    roots = []
    for lo, hi in zip(grid[:-1], grid[1:]):
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            roots.append(float(lo))
            continue
        if flo * fhi > 0:
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0 or hi - lo < tol:
                break
            if flo * fm < 0:
                hi = mid
            else:
                lo, flo = mid, fm
        roots.append(0.5 * (lo + hi))
    out: list[float] = []
    for r in sorted(roots):
        if -math.pi <= r < math.pi and (not out or r - out[-1] > 1e-9):
            out.append(r)
    return [r for r in out if abs(1 - abs(float(re_lambda(spec, r)))) > 1e-12]


def standing_momentum(spec: CoinSpec) -> float:
    """Smallest non-negative standing momentum (``pi/2`` for the Hadamard walk)."""
    roots = standing_momenta(spec)
    if not roots:
        raise ValueError("no isolated zero of the group velocity for this coin")
    nonneg = [r for r in roots if r >= -1e-12]
    return max(nonneg[0], 0.0) if nonneg else roots[0] + 2 * math.pi


def coarse_grain(p: np.ndarray, width: int = 4) -> np.ndarray:
    """Circular moving sum over ``width`` consecutive sites, centred (x - width/2 .. x + width/2 - 1)."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    for s in range(-(width // 2), width - width // 2):
        out += np.roll(p, -s)
    return out


def horn_positions(p: np.ndarray, width: int = 4, rel_prominence: float = 0.1) -> np.ndarray:
    """Sites of the prominent maxima of the coarse-grained distribution.

    Maxima whose prominence is below ``rel_prominence`` times the global
    maximum (interference ripples between the horns) are ignored.
    """
    q = coarse_grain(p, width)
    peaks, _ = find_peaks(np.concatenate([q, q[:1]]), prominence=rel_prominence * q.max())
    return np.sort(np.unique(peaks % q.size))


def local_maxima(q: np.ndarray) -> np.ndarray:
    """Every site of a ring array that is strictly above its left neighbour and
    not below its right one (plateaus count once, at their left end)."""
    q = np.asarray(q, dtype=float)
    left = np.roll(q, 1)
    right = np.roll(q, -1)
    return np.flatnonzero((q > left) & (q >= right) & (q > 0))


def dominant_horns(p: np.ndarray, origin: int, width: int = 4) -> tuple[int, int]:
    """Signed offsets from ``origin`` of the coarse-grained maximum on each side."""
    q = coarse_grain(p, width)
    off = unwrapped_offsets(q.size, origin)
    left = np.where(off < 0, q, -np.inf)
    right = np.where(off > 0, q, -np.inf)
    return int(off[np.argmax(left)]), int(off[np.argmax(right)])
