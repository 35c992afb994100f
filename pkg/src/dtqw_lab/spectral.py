"""Band structure of the translation-invariant walk.

For a plane wave ``e^{ikx}`` the step ``U = T C`` reduces to the 2x2 matrix
``U(k) = diag(e^{-ik}, e^{ik}) C`` whose eigenvalues are

    lambda_pm(k) = e^{i delta} (R(k) +- i sqrt(1 - R(k)^2)),
    R(k) = cos(theta/2) cos k + n_z sin(theta/2) sin k.

``lambda_+`` is the eigenvalue in the upper half of the (phase-rotated) unit
circle. Quasi-energies are ``E = -arg(lambda) / dt`` with ``arg`` in (-pi, pi].
All functions take the dimensionless lattice momentum ``k`` and broadcast over
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coin import CoinMatrix, CoinSpec, build_coin
from .state import Lattice, MomentumState

DEGENERACY_TOL = 1e-14
ARC_TOL = 1e-12

TRANSMITTED_SAME = "transmitted_same_band"
TRANSMITTED_CROSS = "transmitted_cross_band"
EVANESCENT = "evanescent"
KLEIN_CLASSES = (TRANSMITTED_SAME, TRANSMITTED_CROSS, EVANESCENT)


class BandTouchingError(ValueError):
    """Raised where the two bands meet and the group velocity is undefined."""


def _as_spec(coin) -> CoinSpec:
    if isinstance(coin, CoinSpec):
        return coin
    if isinstance(coin, CoinMatrix) and coin.spec is not None:
        return coin.spec
    raise TypeError("expected a CoinSpec or a CoinMatrix built from one")


def _scalar_out(k, *arrays):
    if np.ndim(k) == 0:
        return tuple(a[()] if isinstance(a, np.ndarray) else a for a in arrays)
    return arrays


def re_lambda(spec: CoinSpec, k) -> np.ndarray:
    """``R(k)``: real part of the eigenvalues with the global phase removed."""
    k = np.asarray(k, dtype=np.float64)
    half = spec.theta / 2
    return math.cos(half) * np.cos(k) + spec.axis[2] * math.sin(half) * np.sin(k)


def _is_degenerate(re) -> np.ndarray:
    return 1.0 - np.abs(re) < DEGENERACY_TOL


def band_eigenvalues(spec: CoinSpec, k):
    """Return ``(lambda_+, lambda_-)`` at momentum ``k``."""
    re = re_lambda(spec, k)
    im = np.sqrt(np.clip(1.0 - re * re, 0.0, None))
    rot = np.exp(1j * spec.global_phase)
    return _scalar_out(k, rot * (re + 1j * im), rot * (re - 1j * im))


def quasi_energies(spec: CoinSpec, k, dt: float = 1.0):
    lp, lm = band_eigenvalues(spec, k)
    return _scalar_out(k, -np.angle(lp) / dt, -np.angle(lm) / dt)


def momentum_step_matrix(coin, k, ordering: str = "TC") -> np.ndarray:
    """2x2 one-step matrix at each ``k``; shape ``k.shape + (2, 2)``."""
    mat = coin.matrix if isinstance(coin, CoinMatrix) else build_coin(coin).matrix
    k = np.asarray(k, dtype=np.float64)
    shift = np.zeros(k.shape + (2, 2), dtype=np.complex128)
    shift[..., 0, 0] = np.exp(-1j * k)
    shift[..., 1, 1] = np.exp(1j * k)
    if ordering == "TC":
        return shift @ mat
    if ordering == "CT":
        return mat @ shift
    raise ValueError(f"ordering must be 'TC' or 'CT', got {ordering!r}")


def _eigvec(u: np.ndarray, lam: np.ndarray) -> np.ndarray:
    # two candidate null vectors of (U - lam); keep the better conditioned one
    v1 = np.stack([u[..., 0, 1], lam - u[..., 0, 0]], axis=-1)
    v2 = np.stack([lam - u[..., 1, 1], u[..., 1, 0]], axis=-1)
    n1 = np.linalg.norm(v1, axis=-1)
    n2 = np.linalg.norm(v2, axis=-1)
    v = np.where((n1 >= n2)[..., None], v1, v2)
    n = np.maximum(n1, n2)
    return v / np.where(n > 0, n, 1.0)[..., None]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    first = np.where(np.abs(v[..., 0]) > 1e-12, v[..., 0], v[..., 1])
    mag = np.abs(first)
    phase = np.where(mag > 0, first / np.where(mag > 0, mag, 1.0), 1.0)
    return v * np.conj(phase)[..., None]


def band_eigenvectors(spec: CoinSpec, k):
    """Unit eigen-spinors ``(c_+, c_-)``, each of shape ``k.shape + (2,)``.

    Phase convention: the first non-negligible component is real and positive.
    At band-touching momenta (``|R(k)| = 1``) the step matrix is a multiple of
    the identity and ``c_+ = (1, 0)``, ``c_- = (0, 1)`` by convention.
    """
    k_arr = np.asarray(k, dtype=np.float64)
    u = momentum_step_matrix(spec, k_arr)
    lp, lm = band_eigenvalues(spec, k_arr)
    cp = _fix_phase(_eigvec(u, np.asarray(lp)))
    cm = _fix_phase(_eigvec(u, np.asarray(lm)))
    degen = _is_degenerate(re_lambda(spec, k_arr))
    if np.any(degen):
        cp = np.where(degen[..., None], np.array([1.0, 0.0], dtype=complex), cp)
        cm = np.where(degen[..., None], np.array([0.0, 1.0], dtype=complex), cm)
    return cp, cm


def _velocity(spec: CoinSpec, k):
    k = np.asarray(k, dtype=np.float64)
    half = spec.theta / 2
    num = spec.axis[2] * math.sin(half) * np.cos(k) - math.cos(half) * np.sin(k)
    re = re_lambda(spec, k)
    den = np.sqrt(np.clip(1.0 - re * re, 0.0, None))
    degen = _is_degenerate(re)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(degen, np.nan, num / np.where(degen, 1.0, den))
    return v, degen


def group_velocity(spec: CoinSpec, k):
    """``(v_+, v_-) = dE_pm/dk`` in sites per step."""
    v, degen = _velocity(spec, k)
    if np.any(degen):
        bad = np.asarray(k, dtype=float)[degen] if np.ndim(k) else k
        raise BandTouchingError(f"bands touch at k = {bad}; group velocity undefined")
    return _scalar_out(k, v, -v)


@dataclass(frozen=True, eq=False)
class SpectralBand:
    coin_spec: CoinSpec
    k: np.ndarray
    lambda_plus: np.ndarray = field(repr=False)
    lambda_minus: np.ndarray = field(repr=False)
    energy_plus: np.ndarray = field(repr=False)
    energy_minus: np.ndarray = field(repr=False)
    c_plus: np.ndarray = field(repr=False)
    c_minus: np.ndarray = field(repr=False)
    v_plus: np.ndarray = field(repr=False)
    v_minus: np.ndarray = field(repr=False)


def band_structure(spec: CoinSpec, k, dt: float = 1.0) -> SpectralBand:
    """Tabulate the whole band on ``k``; velocities are NaN where the bands touch."""
    k = np.atleast_1d(np.asarray(k, dtype=np.float64))
    lp, lm = band_eigenvalues(spec, k)
    cp, cm = band_eigenvectors(spec, k)
    v, _ = _velocity(spec, k)
    return SpectralBand(
        spec, k, lp, lm, -np.angle(lp) / dt, -np.angle(lm) / dt, cp, cm, v, -v
    )


def _wrap(angle):
    """Wrap to (-pi, pi]."""
    return -np.angle(np.exp(-1j * np.asarray(angle)))


@dataclass(frozen=True)
class ConeGeometry:
    """Arcs of the unit circle covered by the two bands.

    Arcs are ``(start, end)`` angle pairs traversed counter-clockwise with
    ``end >= start``; the ``+`` band arc comes first in ``allowed_arcs``.
    """

    dilation_angle: float
    tilt_angle: float
    allowed_arcs: tuple[tuple[float, float], ...]
    forbidden_arcs: tuple[tuple[float, float], ...]

    @property
    def plus_arc(self) -> tuple[float, float]:
        return self.allowed_arcs[0]

    @property
    def minus_arc(self) -> tuple[float, float]:
        return self.allowed_arcs[1]


def cone_geometry(spec: CoinSpec) -> ConeGeometry:
    half = spec.theta / 2
    r = math.sqrt(math.cos(half) ** 2 + (spec.axis[2] * math.sin(half)) ** 2)
    edge = math.acos(min(r, 1.0))
    dil = math.pi - 2.0 * edge
    d = spec.global_phase
    plus = (edge + d, math.pi - edge + d)
    minus = (-math.pi + edge + d, -edge + d)
    forbidden = tuple(
        arc
        for arc in ((math.pi - edge + d, math.pi + edge + d), (-edge + d, edge + d))
        if arc[1] - arc[0] > 0
    )
    return ConeGeometry(dil, float(_wrap(math.pi / 2 + d)), (plus, minus), forbidden)


def arc_offset(angle, arc: tuple[float, float]):
    """Counter-clockwise angular distance of ``angle`` from the arc start, in [0, 2pi)."""
    return np.mod(np.asarray(angle) - arc[0], 2 * np.pi)


def in_arc(angle, arc: tuple[float, float], strict: bool = False, tol: float = ARC_TOL):
    """Membership of ``angle`` in ``arc``; ``strict`` excludes the end points."""
    width = arc[1] - arc[0]
    off = arc_offset(angle, arc)
    if strict:
        return (off > tol) & (off < width - tol)
    return (off <= width + tol) | (off >= 2 * np.pi - tol)


@dataclass(frozen=True, eq=False)
class BandWeights:
    """Band amplitudes ``f_pm(k) = <c_pm(k)|psi~(k)>`` on the lattice momentum grid."""

    lattice: Lattice
    coin_spec: CoinSpec
    f_plus: np.ndarray = field(repr=False)
    f_minus: np.ndarray = field(repr=False)

    @property
    def k(self) -> np.ndarray:
        return self.lattice.momenta

    def total(self) -> float:
        return float(np.sum(np.abs(self.f_plus) ** 2 + np.abs(self.f_minus) ** 2))


def band_decompose(m: MomentumState, spec: CoinSpec) -> BandWeights:
    cp, cm = band_eigenvectors(spec, m.k)
    fp = np.sum(np.conj(cp) * m.amplitudes, axis=1)
    fm = np.sum(np.conj(cm) * m.amplitudes, axis=1)
    return BandWeights(m.lattice, spec, fp, fm)


def band_recompose(weights: BandWeights) -> MomentumState:
    cp, cm = band_eigenvectors(weights.coin_spec, weights.k)
    amps = weights.f_plus[:, None] * cp + weights.f_minus[:, None] * cm
    return MomentumState(weights.lattice, amps)


def momentum_propagate(m: MomentumState, spec: CoinSpec, t: int) -> MomentumState:
    """Free evolution by ``t`` steps: ``sum_j f_j(k) lambda_j(k)^t c_j(k)``."""
    if int(t) != t or t < 0:
        raise ValueError(f"t must be a non-negative integer, got {t!r}")
    if t == 0:
        return m
    w = band_decompose(m, spec)
    lp, lm = band_eigenvalues(spec, m.k)
    fp = w.f_plus * np.exp(1j * int(t) * np.angle(lp))
    fm = w.f_minus * np.exp(1j * int(t) * np.angle(lm))
    return band_recompose(BandWeights(m.lattice, spec, fp, fm))


@dataclass(frozen=True, eq=False)
class KleinReport:
    """Per-momentum fate of each band component when entering a region with phase ``phi``."""

    phi: float
    k: np.ndarray
    class_plus: np.ndarray = field(repr=False)
    class_minus: np.ndarray = field(repr=False)
    weights: dict[str, float] = field(default_factory=dict)

    @property
    def predicted_nondecaying_fraction(self) -> float:
        return self.weights[TRANSMITTED_SAME] + self.weights[TRANSMITTED_CROSS]


def _classify(angles, own: tuple, other: tuple, phi: float, identical: bool):
    own_r = (own[0] + phi, own[1] + phi)
    other_r = (other[0] + phi, other[1] + phi)
    same = in_arc(angles, own_r, strict=not identical)
    cross = ~same & in_arc(angles, other_r, strict=True)
    out = np.full(np.shape(angles), EVANESCENT, dtype=object)
    out[same] = TRANSMITTED_SAME
    out[cross] = TRANSMITTED_CROSS
    return out


def klein_classify(spec: CoinSpec, weights: BandWeights, phi: float) -> KleinReport:
    """Intersect the packet's eigenvalues with the spectrum rotated by ``exp(i phi)``.

    A component whose eigenvalue lies strictly inside the rotated arc of its
    own band keeps propagating in that band; strictly inside the rotated arc of
    the other band it propagates as the opposite band (Klein tunneling);
    anywhere else, including arc end points where the group velocity vanishes,
    it is evanescent. For ``phi = 0 mod 2pi`` the regions coincide and every
    component counts as same-band.
    """
    geo = cone_geometry(spec)
    lp, lm = band_eigenvalues(spec, weights.k)
    identical = bool(np.isclose(np.mod(phi + np.pi, 2 * np.pi) - np.pi, 0.0, atol=ARC_TOL))
    cls_p = _classify(np.angle(lp), geo.plus_arc, geo.minus_arc, phi, identical)
    cls_m = _classify(np.angle(lm), geo.minus_arc, geo.plus_arc, phi, identical)
    wp = np.abs(weights.f_plus) ** 2
    wm = np.abs(weights.f_minus) ** 2
    total = float(np.sum(wp) + np.sum(wm))
    if total <= 0:
        raise ValueError("band weights are identically zero")
    agg = {
        name: float((np.sum(wp[cls_p == name]) + np.sum(wm[cls_m == name])) / total)
        for name in KLEIN_CLASSES
    }
    return KleinReport(float(phi), weights.k, cls_p, cls_m, agg)


def closes_all_channels(spec: CoinSpec, phi: float) -> bool:
    """True when no eigenvalue of the free walk lies strictly inside a rotated arc."""
    geo = cone_geometry(spec)
    for arc in geo.allowed_arcs:
        for target in geo.allowed_arcs:
            rot = (target[0] + phi, target[1] + phi)
            # two arcs overlap in their interiors iff either start lies strictly inside the other
            if in_arc(arc[0], rot, strict=True) or in_arc(rot[0], arc, strict=True):
                return False
            off = arc_offset(arc[0], rot)
            same_start = off < ARC_TOL or off > 2 * np.pi - ARC_TOL
            if same_start and min(arc[1] - arc[0], rot[1] - rot[0]) > ARC_TOL:
                return False
    return True
