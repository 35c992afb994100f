"""Dynamical Klein-tunneling and confinement runs on step potentials.

Decay is judged on the spatial profile inside the potential region: the
probability at each depth is accumulated over the whole run, which for a
packet that passes through is flat in depth and for an evanescent tail falls
off exponentially. The fitted rate is the log-linear slope of that profile
(per site of depth, in probability).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coin import CoinSpec, build_coin
from .evolution import PotentialProfile, StepConfig, _advance, make_step_potential, region_depth
from .observables import delta_x_operator, mean_position, packet_center
from .spectral import KleinReport, band_decompose, closes_all_channels, cone_geometry, klein_classify
from .state import Lattice, WalkerState, dft, gaussian_packet, position_distribution

FIT_DEPTHS = (5, 30)


@dataclass(frozen=True)
class PacketParams:
    x0: float
    k0: float
    sigma_x: float
    band: object = "plus"

    def build(self, lattice: Lattice, spec: CoinSpec) -> WalkerState:
        return gaussian_packet(lattice, self.x0, self.k0, self.sigma_x, self.band, spec)


def mean_velocity(state: WalkerState, spec: CoinSpec) -> float:
    """Expected one-step displacement ``<dX>`` of ``state`` (sites per step)."""
    op = delta_x_operator(build_coin(spec), state.lattice.spacing)
    return float(np.sum(op.expectation(state.amplitudes)))


def fit_decay_rate(profile: np.ndarray, depths: np.ndarray) -> float:
    """Slope of ``-log(profile)`` against depth; positive for a decaying tail."""
    tiny = np.finfo(float).tiny
    y = np.log(np.maximum(profile, tiny))
    slope = np.polyfit(depths.astype(float), y, 1)[0]
    return float(-slope)


@dataclass(frozen=True, eq=False)
class TransmissionRecord:
    times: np.ndarray
    depths: tuple[int, ...]
    mass_beyond: np.ndarray = field(repr=False)
    """``mass_beyond[t, j]``: probability deeper than ``depths[j]`` after ``t + 1`` steps."""
    region_mass: np.ndarray = field(repr=False)
    profile_depths: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    decay_rate: float
    prediction: KleinReport
    arrival_time: float
    norm_drift: float


def run_klein(
    coin_spec: CoinSpec,
    packet: PacketParams,
    lattice: Lattice,
    a: int,
    phi: float,
    T: int,
    depths: Sequence[int] = (30,),
    fit_depths: tuple[int, int] = FIT_DEPTHS,
) -> TransmissionRecord:
    """Send ``packet`` from the free side onto the step ``phi`` at sites ``x > a``."""
    initial = state = packet.build(lattice, coin_spec)
    if not packet.x0 < a:
        raise ValueError(f"packet center {packet.x0} must lie left of the step at a = {a}")
    if lattice.sites - 1 - a > lattice.sites // 2:
        raise ValueError("the potential region must occupy at most half of the ring")
    v = mean_velocity(state, coin_spec)
    if not v > 0:
        raise ValueError(f"packet is not incident on the step (mean velocity {v:.3g} <= 0)")
    arrival = (a - packet.x0) / v + 4 * packet.sigma_x
    if T <= arrival:
        raise ValueError(f"T = {T} ends before the packet has reached the step (t ~ {arrival:.0f})")
    depths = tuple(int(d) for d in depths)
    if any(d <= 0 for d in depths):
        raise ValueError("depths must be positive")

    potential = make_step_potential(lattice, a, phi)
    cfg = StepConfig(build_coin(coin_spec), potential)
    depth = region_depth(np.arange(lattice.sites) > a)
    d_lo, d_hi = fit_depths
    prof_depths = np.arange(d_lo, d_hi + 1)
    masks = [depth > d for d in depths]
    in_region = depth > 0

    mass_beyond = np.empty((int(T), len(depths)))
    region_mass = np.empty(int(T))
    cumulative = np.zeros(lattice.sites)
    for t in range(int(T)):
        state = _advance(state, cfg, 1)
        p = position_distribution(state)
        cumulative += p
        region_mass[t] = p[in_region].sum()
        for j, m in enumerate(masks):
            mass_beyond[t, j] = p[m].sum()
    profile = np.array([cumulative[depth == d].sum() for d in prof_depths]) / T

    report = klein_classify(coin_spec, band_decompose(dft(initial), coin_spec), phi)
    return TransmissionRecord(
        np.arange(1, int(T) + 1),
        depths,
        mass_beyond,
        region_mass,
        prof_depths,
        profile,
        fit_decay_rate(profile, prof_depths),
        report,
        float(arrival),
        abs(state.norm() - 1.0),
    )


def wall_region(lattice: Lattice, walls: Sequence[int]) -> np.ndarray:
    """Mask of sites behind the walls.

    Two walls ``(left, right)`` leave the box ``left <= x < right`` free. A
    single wall ``w`` covers ``w < x <= w + N/2`` (modulo ``N``).
    """
    n = lattice.sites
    mask = np.zeros(n, dtype=bool)
    if len(walls) == 2:
        left, right = (int(w) for w in walls)
        if not (0 <= left < right <= n) or right - left < 2 or right - left > n - 2:
            raise ValueError(f"walls {tuple(walls)} leave no interior box on {n} sites")
        mask[:] = True
        mask[left:right] = False
    elif len(walls) == 1:
        w = int(walls[0])
        if not 0 <= w < n:
            raise ValueError(f"wall {w} outside the lattice")
        mask[(w + 1 + np.arange(n // 2)) % n] = True
    else:
        raise ValueError("expected one or two wall positions")
    return mask


def wall_potential(lattice: Lattice, walls: Sequence[int], phi: float) -> PotentialProfile:
    return PotentialProfile(lattice, np.where(wall_region(lattice, walls), float(phi), 0.0))


@dataclass(frozen=True, eq=False)
class ConfinementRecord:
    times: np.ndarray
    inside: np.ndarray = field(repr=False)
    """Probability on free (zero-phase) sites."""
    outside_deep: np.ndarray = field(repr=False)
    """Probability deeper than ``skin`` sites into the walls."""
    mean_position: np.ndarray = field(repr=False)
    skin: int
    channels_closed: bool
    norm_drift: float

    @property
    def max_outside(self) -> float:
        return float(np.max(self.outside_deep))


def run_confinement(
    coin_spec: CoinSpec,
    packet: PacketParams,
    lattice: Lattice,
    walls: Sequence[int],
    phi: float = math.pi / 2,
    T: int = 2000,
    skin: int = 30,
) -> ConfinementRecord:
    """Track how much probability escapes past one or two phase walls.

    ``mean_position`` is NaN at steps where the packet straddles the ring seam.
    """
    if cone_geometry(coin_spec).dilation_angle > math.pi / 2 + 1e-12:
        raise ValueError("no wall phase can close every channel for this coin (dilation > pi/2)")
    region = wall_region(lattice, walls)
    cfg = StepConfig(build_coin(coin_spec), wall_potential(lattice, walls, phi))
    depth = region_depth(region)
    free = depth == 0
    deep = depth > skin
    state = packet.build(lattice, coin_spec)
    center = packet_center(position_distribution(state))

    inside = np.empty(int(T) + 1)
    outside = np.empty(int(T) + 1)
    xs = np.empty(int(T) + 1)
    for t in range(int(T) + 1):
        if t:
            state = _advance(state, cfg, 1)
        p = position_distribution(state)
        inside[t] = p[free].sum()
        outside[t] = p[deep].sum()
        try:
            xs[t] = mean_position(state, center)
        except ValueError:
            xs[t] = np.nan
    return ConfinementRecord(
        np.arange(int(T) + 1),
        inside,
        outside,
        xs,
        int(skin),
        closes_all_channels(coin_spec, phi),
        abs(state.norm() - 1.0),
    )
