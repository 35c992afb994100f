"""Time-symmetric lattice discretization of the free 1D Dirac equation.

With ``gamma = m dt / 2``, ``a = (1 - gamma^2) / (1 + gamma^2)`` and
``b = 2 gamma / (1 + gamma^2)`` one step reads

    psi_u(x, t + dt) = a psi_u(x - dx, t) - b psi_d(x, t)
    psi_d(x, t + dt) = a psi_d(x + dx, t) + b psi_u(x, t)

Its momentum-space step ``M(k) = S(k) C S(k)`` with the half shift
``S(k) = diag(e^{-ik dx/2}, e^{ik dx/2})`` is similar to the walk step
``U(k) = S(k)^2 C`` for the coin returned by :func:`dirac_coin`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .coin import CoinSpec, build_coin
from .spectral import band_eigenvalues, momentum_step_matrix
from .state import WalkerState


@dataclass(frozen=True)
class DiracParams:
    mass: float
    dt: float = 1.0
    dx: float | None = None

    def __post_init__(self):
        if not self.mass >= 0:
            raise ValueError(f"mass must be non-negative, got {self.mass!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.dx is None:
            object.__setattr__(self, "dx", float(self.dt))
        elif not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx!r}")

    @property
    def gamma(self) -> float:
        return self.mass * self.dt / 2

    @property
    def a(self) -> float:
        g2 = self.gamma**2
        return (1 - g2) / (1 + g2)

    @property
    def b(self) -> float:
        return 2 * self.gamma / (1 + self.gamma**2)

    @property
    def light_cone(self) -> bool:
        return math.isclose(self.dx, self.dt, rel_tol=1e-12, abs_tol=0.0)


def _require_light_cone(params: DiracParams):
    if not params.light_cone:
        raise ValueError(
            f"the walk correspondence needs dx == dt (got dx={params.dx}, dt={params.dt})"
        )


def dirac_evolve(state: WalkerState, params: DiracParams, steps: int = 1) -> WalkerState:
    if not math.isclose(state.lattice.spacing, params.dx, rel_tol=1e-12):
        raise ValueError(
            f"lattice spacing {state.lattice.spacing} does not match dx = {params.dx}"
        )
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps!r}")
    up, down = kernels.dirac_steps(state.up, state.down, params.a, params.b, int(steps))
    return WalkerState.from_components(state.lattice, up, down)


def dirac_step(state: WalkerState, params: DiracParams) -> WalkerState:
    return dirac_evolve(state, params, 1)


def dirac_coin(params: DiracParams, axis_sign: int = -1) -> CoinSpec:
    """Coin with ``cos(theta/2) = a`` and ``sin(theta/2) = b``.

    ``axis_sign=-1`` reproduces the ``-b psi_d`` coupling of the lattice Dirac
    step; ``+1`` gives the transposed coupling.
    """
    if axis_sign not in (-1, 1):
        raise ValueError("axis_sign must be +1 or -1")
    return CoinSpec(4.0 * math.atan(params.gamma), (0.0, float(axis_sign), 0.0))


def half_shift(k, dx: float = 1.0) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    s = np.zeros(k.shape + (2, 2), dtype=np.complex128)
    s[..., 0, 0] = np.exp(-0.5j * k * dx)
    s[..., 1, 1] = np.exp(0.5j * k * dx)
    return s


def dirac_step_matrix(params: DiracParams, k) -> np.ndarray:
    """Momentum-space one-step matrix of the lattice Dirac update."""
    k = np.asarray(k, dtype=np.float64)
    a, b = params.a, params.b
    m = np.zeros(k.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = a * np.exp(-1j * k * params.dx)
    m[..., 0, 1] = -b
    m[..., 1, 0] = b
    m[..., 1, 1] = a * np.exp(1j * k * params.dx)
    return m


@dataclass(frozen=True)
class EquivalenceReport:
    max_eigenvalue_mismatch: float
    max_similarity_residual: float
    max_closed_form_mismatch: float


def _eig_set_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # unordered pairs: best of the two matchings
    d1 = np.maximum(np.abs(x[..., 0] - y[..., 0]), np.abs(x[..., 1] - y[..., 1]))
    d2 = np.maximum(np.abs(x[..., 0] - y[..., 1]), np.abs(x[..., 1] - y[..., 0]))
    return np.minimum(d1, d2)


def spectral_equivalence_check(params: DiracParams, k) -> EquivalenceReport:
    """Compare the lattice Dirac step with the walk using :func:`dirac_coin`.

    Checks ``M(k) = S(k) C S(k)`` entrywise and compares eigenvalue sets of
    ``M(k)`` and ``U(k)`` (both by numerical diagonalization) and of ``M(k)``
    against the closed-form walk band.
    """
    _require_light_cone(params)
    k = np.atleast_1d(np.asarray(k, dtype=np.float64))
    spec = dirac_coin(params)
    coin = build_coin(spec).matrix
    m = dirac_step_matrix(params, k)
    s = half_shift(k, params.dx)
    residual = np.max(np.abs(m - s @ coin @ s))
    u = momentum_step_matrix(spec, k * params.dx)
    ev_m = np.linalg.eigvals(m)
    ev_u = np.linalg.eigvals(u)
    lp, lm = band_eigenvalues(spec, k * params.dx)
    closed = np.stack([lp, lm], axis=-1)
    return EquivalenceReport(
        float(np.max(_eig_set_distance(ev_m, ev_u))),
        float(residual),
        float(np.max(_eig_set_distance(ev_m, closed))),
    )


def dirac_dispersion(params: DiracParams, k):
    """Lattice quasi-energies ``(E_+, E_-)`` and the deviation from sqrt(k^2 + m^2).

    ``k`` is in physical units, ``|k| <= pi / dx``.
    """
    _require_light_cone(params)
    k_arr = np.asarray(k, dtype=np.float64)
    if np.any(np.abs(k_arr) > math.pi / params.dx * (1 + 1e-12)):
        raise ValueError("|k| must not exceed pi / dx")
    lp, lm = band_eigenvalues(dirac_coin(params), k_arr * params.dx)
    ep = -np.angle(lp) / params.dt
    em = -np.angle(lm) / params.dt
    err = np.abs(np.minimum(np.abs(ep), np.abs(em)) - np.sqrt(k_arr**2 + params.mass**2))
    if np.ndim(k) == 0:
        return float(ep), float(em), float(err)
    return ep, em, err


def gap_edge(params: DiracParams) -> float:
    """Smallest attainable ``|E|``: ``2 arctan(gamma) / dt``."""
    return 2.0 * math.atan(params.gamma) / params.dt
