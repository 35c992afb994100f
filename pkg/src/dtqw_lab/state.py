"""Ring lattice, two-component wave functions and the lattice Fourier transform.

Positions are site indices ``x = 0 .. N-1`` (physical coordinate ``x * spacing``).
Momenta live on the ascending grid ``k_j = 2*pi*j/N - pi`` in units of
``1/spacing``; with the convention

    psi~(k) = N**-1/2 * sum_x exp(-i k x) psi(x)

the transform is unitary and ``idft(dft(s)) == s`` to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

if TYPE_CHECKING:
    from .coin import CoinSpec

NORM_TOL = 1e-10
SPINOR_TOL = 1e-9
WRAP_TOL = 1e-6


@dataclass(frozen=True)
class Lattice:
    """Periodic chain of ``sites`` sites.

    ``sites`` must be even so that ``k = +-pi/2`` sits exactly on the momentum
    grid.
    """

    sites: int
    spacing: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        if int(self.sites) != self.sites or self.sites < 2:
            raise ValueError(f"sites must be an integer >= 2, got {self.sites!r}")
        if self.sites % 2:
            raise ValueError(f"sites must be even, got {self.sites}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, "sites", int(self.sites))

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.sites) * self.spacing

    @property
    def momenta(self) -> np.ndarray:
        """Dimensionless momentum grid ``2*pi*j/N - pi`` (multiply by 1/spacing for physical k)."""
        return 2.0 * np.pi * np.arange(self.sites) / self.sites - np.pi


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class _TwoComponent:
    lattice: Lattice
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.lattice.sites, 2):
            raise ValueError(
                f"amplitudes must have shape ({self.lattice.sites}, 2), got {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        drift = abs(self.norm() - 1.0)
        if drift > NORM_TOL:
            raise ValueError(f"state is not normalized (|norm - 1| = {drift:.3e})")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    @property
    def up(self) -> np.ndarray:
        return self.amplitudes[:, 0]

    @property
    def down(self) -> np.ndarray:
        return self.amplitudes[:, 1]


class WalkerState(_TwoComponent):
    """Position-space amplitudes ``(psi_+(x), psi_-(x))`` with shape ``(N, 2)``."""

    @classmethod
    def from_components(cls, lattice: Lattice, up, down) -> "WalkerState":
        return cls(lattice, np.stack([np.asarray(up), np.asarray(down)], axis=1))


class MomentumState(_TwoComponent):
    """Momentum-space amplitudes on ``lattice.momenta``, shape ``(N, 2)``."""

    @property
    def k(self) -> np.ndarray:
        return self.lattice.momenta


def _check_spinor(spinor) -> np.ndarray:
    s = np.asarray(spinor, dtype=np.complex128).reshape(-1)
    if s.shape != (2,):
        raise ValueError("spinor must have exactly two components")
    if abs(np.linalg.norm(s) - 1.0) > SPINOR_TOL:
        raise ValueError(f"spinor is not normalized (norm = {np.linalg.norm(s):.12g})")
    return s


def point_state(lattice: Lattice, x0: int, spinor=(1.0, 0.0)) -> WalkerState:
    """All amplitude on site ``x0`` with coin state ``spinor``."""
    if int(x0) != x0 or not 0 <= x0 < lattice.sites:
        raise ValueError(f"x0 must be a site index in [0, {lattice.sites}), got {x0!r}")
    s = _check_spinor(spinor)
    s = s / np.linalg.norm(s)
    amps = np.zeros((lattice.sites, 2), dtype=np.complex128)
    amps[int(x0)] = s
    return WalkerState(lattice, amps)


def _parity(n: int) -> np.ndarray:
    # exp(i*pi*x) for the shifted grid k_j = 2*pi*j/N - pi
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def dft(state: WalkerState) -> MomentumState:
    n = state.lattice.sites
    amps = np.fft.fft(state.amplitudes * _parity(n)[:, None], axis=0, norm="ortho")
    return MomentumState(state.lattice, amps)


def idft(mstate: MomentumState) -> WalkerState:
    n = mstate.lattice.sites
    amps = np.fft.ifft(mstate.amplitudes, axis=0, norm="ortho") * _parity(n)[:, None]
    return WalkerState(mstate.lattice, amps)


def position_distribution(state: WalkerState) -> np.ndarray:
    return np.sum(np.abs(state.amplitudes) ** 2, axis=1)


Band = Union[str, Sequence[complex]]


def gaussian_packet(
    lattice: Lattice,
    x0: float,
    k0: float,
    sigma_x: float,
    band: Band = "plus",
    coin_spec: "CoinSpec | None" = None,
) -> WalkerState:
    """Gaussian packet with position envelope ``exp(-(x-x0)**2 / (4 sigma_x**2)) e^{i k0 x}``.

    The packet is assembled on the momentum grid, where the amplitude is
    ``exp(-sigma_x**2 (k-k0)**2)``, so that projecting onto a single band
    (``band="plus"`` / ``"minus"``) is exact. Any other ``band`` value is
    taken as a fixed 2-component spinor.
    """
    if not sigma_x >= 1:
        raise ValueError(f"sigma_x must be >= 1, got {sigma_x!r}")
    overlap = math.erfc(lattice.sites / (2.0 * math.sqrt(2.0) * sigma_x))
    if overlap > WRAP_TOL:
        raise ValueError(
            f"sigma_x={sigma_x} is too wide for {lattice.sites} sites "
            f"(wrap-around overlap {overlap:.2e} > {WRAP_TOL:g})"
        )
    k = lattice.momenta
    dk = np.angle(np.exp(1j * (k - k0)))
    envelope = np.exp(-(sigma_x**2) * dk**2) * np.exp(-1j * k * x0)

    if isinstance(band, str):
        if band not in ("plus", "minus"):
            raise ValueError(f"band must be 'plus', 'minus' or a spinor, got {band!r}")
        if coin_spec is None:
            raise ValueError("coin_spec is required to project onto a band")
        from .spectral import band_eigenvectors

        c_plus, c_minus = band_eigenvectors(coin_spec, k)
        spinors = c_plus if band == "plus" else c_minus
    else:
        spinors = np.broadcast_to(_check_spinor(band), (lattice.sites, 2))

    amps = envelope[:, None] * spinors
    amps = amps / np.linalg.norm(amps)
    return idft(MomentumState(lattice, amps))
