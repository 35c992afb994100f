"""Coin operators ``C = exp(i delta) exp(i theta/2 n.sigma)`` and named presets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

AXIS_TOL = 1e-12
UNITARY_TOL = 1e-12

SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class CoinSpec:
    """Rotation by ``theta`` about the unit ``axis``, times the phase ``exp(i global_phase)``."""

    theta: float
    axis: tuple[float, float, float]
    global_phase: float = 0.0

    def __post_init__(self):
        axis = tuple(float(a) for a in self.axis)
        if len(axis) != 3:
            raise ValueError(f"axis must have three components, got {self.axis!r}")
        norm = math.sqrt(sum(a * a for a in axis))
        if abs(norm - 1.0) > AXIS_TOL:
            raise ValueError(f"axis must be a unit vector (|n| = {norm:.15g})")
        if not (math.isfinite(self.theta) and math.isfinite(self.global_phase)):
            raise ValueError("theta and global_phase must be finite")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "global_phase", float(self.global_phase))

    @property
    def alpha(self) -> tuple[complex, complex]:
        """Diagonal entries (alpha_+, alpha_-) before the global phase."""
        c, s = math.cos(self.theta / 2), math.sin(self.theta / 2)
        nz = self.axis[2]
        return complex(c, nz * s), complex(c, -nz * s)

    @property
    def beta(self) -> tuple[complex, complex]:
        """Off-diagonal entries (beta_+, beta_-) before the global phase."""
        s = math.sin(self.theta / 2)
        nx, ny = self.axis[0], self.axis[1]
        return complex(ny * s, nx * s), complex(-ny * s, nx * s)


@dataclass(frozen=True, eq=False)
class CoinMatrix:
    """Unitary 2x2 coin; ``matrix[0, 0]`` acts on the right-moving component."""

    matrix: np.ndarray = field(repr=False)
    spec: CoinSpec | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        if m.shape != (2, 2):
            raise ValueError(f"coin must be 2x2, got shape {m.shape}")
        err = np.max(np.abs(m @ m.conj().T - np.eye(2)))
        if err > UNITARY_TOL:
            raise ValueError(f"coin is not unitary (max |CC^dag - I| = {err:.3e})")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    c11 = property(lambda self: complex(self.matrix[0, 0]))
    c12 = property(lambda self: complex(self.matrix[0, 1]))
    c21 = property(lambda self: complex(self.matrix[1, 0]))
    c22 = property(lambda self: complex(self.matrix[1, 1]))

    def entries(self) -> np.ndarray:
        """(c11, c12, c21, c22) as a flat array, the layout the kernels take."""
        return self.matrix.reshape(4).copy()


def build_coin(spec: CoinSpec) -> CoinMatrix:
    ap, am = spec.alpha
    bp, bm = spec.beta
    phase = complex(math.cos(spec.global_phase), math.sin(spec.global_phase))
    m = phase * np.array([[ap, bp], [bm, am]], dtype=np.complex128)
    return CoinMatrix(m, spec)


def hadamard() -> CoinSpec:
    """Hadamard-class coin: ``C = (i/sqrt2) [[1, 1], [1, -1]]``.

    The rotation axis lies in the x-z plane. The x-y axis (1/sqrt2, 1/sqrt2, 0)
    gives flat bands at +-i instead; see :func:`hadamard_xy`.
    """
    return CoinSpec(math.pi, (SQRT_HALF, 0.0, SQRT_HALF))


def hadamard_xy() -> CoinSpec:
    """theta = pi about (1/sqrt2, 1/sqrt2, 0); kept to show its flat spectrum."""
    return CoinSpec(math.pi, (SQRT_HALF, SQRT_HALF, 0.0))


def identity() -> CoinSpec:
    return CoinSpec(0.0, (0.0, 0.0, 1.0))


PRESETS = ("hadamard", "hadamard_xy", "identity", "dirac")


def preset(name: str, **params) -> CoinSpec:
    """Look up a named coin.

    ``dirac`` takes ``mass`` and ``dt`` (and optionally ``dx``) keyword arguments.
    """
    if name == "hadamard":
        return hadamard()
    if name == "hadamard_xy":
        return hadamard_xy()
    if name == "identity":
        return identity()
    if name == "dirac":
        from .dirac import DiracParams, dirac_coin

        return dirac_coin(DiracParams(**params))
    raise ValueError(f"unknown coin preset {name!r}; expected one of {', '.join(PRESETS)}")
