"""Position-space walk steps ``U = P T C`` (or ``P C T``) on the ring.

``T`` moves the up component one site toward +x and the down component one
site toward -x; ``P`` multiplies site ``x`` by ``exp(i phi(x))`` and is applied
last in either ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import kernels
from .coin import CoinMatrix
from .state import Lattice, WalkerState, position_distribution


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    lattice: Lattice
    phase: np.ndarray = field(repr=False)

    def __post_init__(self):
        ph = np.array(self.phase, dtype=np.float64, copy=True)
        if ph.shape != (self.lattice.sites,):
            raise ValueError(f"phase must have length {self.lattice.sites}, got {ph.shape}")
        if not np.all(np.isfinite(ph)):
            raise ValueError("potential phases must be finite")
        ph.flags.writeable = False
        object.__setattr__(self, "phase", ph)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.phase)

    def factors(self) -> np.ndarray:
        return np.exp(1j * self.phase)

    @property
    def region(self) -> np.ndarray:
        """Boolean mask of sites carrying a nonzero phase."""
        return self.phase != 0


def zero_potential(lattice: Lattice) -> PotentialProfile:
    return PotentialProfile(lattice, np.zeros(lattice.sites))


def make_step_potential(lattice: Lattice, a: int, phi: float) -> PotentialProfile:
    """Phase ``phi`` on every site ``x > a``, zero on ``x <= a``."""
    if int(a) != a or not 0 <= a < lattice.sites:
        raise ValueError(f"a must be a site index in [0, {lattice.sites}), got {a!r}")
    phase = np.zeros(lattice.sites)
    phase[int(a) + 1 :] = phi
    return PotentialProfile(lattice, phase)


def region_depth(mask: np.ndarray) -> np.ndarray:
    """Ring distance of every site to the nearest site outside ``mask``.

    Sites outside the region get depth 0, the first site inside gets 1.
    A mask covering the whole ring has no boundary and gets depth ``N``.
    """
    mask = np.asarray(mask, dtype=bool)
    n = mask.size
    if mask.all():
        return np.full(n, n)
    depth = np.where(mask, n, 0)
    # two sweeps around the ring each way cover the wrap-around
    for _ in range(2):
        for x in range(n):
            if mask[x]:
                depth[x] = min(depth[x], depth[x - 1] + 1)
        for x in range(n - 1, -1, -1):
            if mask[x]:
                depth[x] = min(depth[x], depth[(x + 1) % n] + 1)
    return depth


@dataclass(frozen=True)
class StepConfig:
    coin: CoinMatrix
    potential: PotentialProfile | None = None
    ordering: Literal["TC", "CT"] = "TC"

    def __post_init__(self):
        if self.ordering not in ("TC", "CT"):
            raise ValueError(f"ordering must be 'TC' or 'CT', got {self.ordering!r}")

    def phase_factors(self, lattice: Lattice) -> np.ndarray | None:
        if self.potential is None:
            return None
        if self.potential.lattice != lattice:
            raise ValueError("potential and state live on different lattices")
        if self.potential.is_zero:
            return None
        return self.potential.factors()


def _advance(state: WalkerState, cfg: StepConfig, steps: int) -> WalkerState:
    phase = cfg.phase_factors(state.lattice)
    up, down = kernels.walk_steps(
        state.up, state.down, cfg.coin.entries(), phase, steps, cfg.ordering == "CT"
    )
    return WalkerState.from_components(state.lattice, up, down)


def step(state: WalkerState, cfg: StepConfig) -> WalkerState:
    return _advance(state, cfg, 1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    final: WalkerState
    times: np.ndarray
    snapshots: np.ndarray | None
    """Distributions ``(len(times), N)`` or amplitudes ``(len(times), N, 2)``."""


def evolve(
    state: WalkerState,
    cfg: StepConfig,
    steps: int,
    record: int | None = None,
    store: Literal["distribution", "amplitudes"] = "distribution",
) -> Trajectory:
    """Apply ``steps`` walk steps, snapshotting every ``record`` steps from t = 0."""
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps!r}")
    if record is None:
        return Trajectory(_advance(state, cfg, int(steps)), np.array([0, int(steps)]), None)
    if int(record) != record or record < 1:
        raise ValueError(f"record must be a positive integer, got {record!r}")
    if store not in ("distribution", "amplitudes"):
        raise ValueError(f"store must be 'distribution' or 'amplitudes', got {store!r}")

    def snap(s: WalkerState):
        return position_distribution(s) if store == "distribution" else np.array(s.amplitudes)

    times = [0]
    shots = [snap(state)]
    t = 0
    while t < steps:
        chunk = min(int(record), int(steps) - t)
        state = _advance(state, cfg, chunk)
        t += chunk
        if chunk == record:
            times.append(t)
            shots.append(snap(state))
    return Trajectory(state, np.array(times), np.array(shots))
