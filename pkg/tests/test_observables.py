import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtqw_lab.coin import CoinSpec, build_coin, hadamard
from dtqw_lab.dirac import DiracParams, dirac_coin, dirac_dispersion
from dtqw_lab.evolution import StepConfig, evolve, make_step_potential
from dtqw_lab.observables import (
    NoOscillationError,
    SeamError,
    coarse_grain,
    delta_x_operator,
    delta_x_series_analytic,
    delta_x_series_simulated,
    dominant_horns,
    estimate_frequency,
    horn_positions,
    local_maxima,
    mean_position,
    packet_center,
    predicted_frequency,
    standing_momenta,
    standing_momentum,
)
from dtqw_lab.spectral import band_decompose, band_eigenvectors, group_velocity
from dtqw_lab.state import Lattice, WalkerState, dft, gaussian_packet, point_state, position_distribution

from conftest import coin_specs, random_amplitudes


def test_delta_x_for_hadamard_is_sigma_x():
    assert np.allclose(delta_x_operator(build_coin(hadamard())).matrix, [[0, 1], [1, 0]], atol=1e-15)


@given(coin_specs())
def test_delta_x_is_coin_conjugated_sigma_z(spec):
    c = build_coin(spec).matrix
    want = c.conj().T @ np.diag([1, -1]) @ c
    assert np.allclose(delta_x_operator(build_coin(spec), 2.5).matrix, 2.5 * want, atol=1e-13)


@given(coin_specs(), st.floats(-3.0, 3.0))
def test_eigenstate_velocity_equals_group_velocity(spec, k):
    from dtqw_lab.spectral import re_lambda

    if 1 - abs(re_lambda(spec, k)) < 1e-8:
        return
    op = delta_x_operator(build_coin(spec))
    cp, cm = band_eigenvectors(spec, k)
    vp, vm = group_velocity(spec, k)
    assert abs(op.expectation(cp) - vp) < 1e-10
    assert abs(op.expectation(cm) - vm) < 1e-10


@given(coin_specs(), st.integers(0, 1000))
def test_delta_x_bounded(spec, seed):
    amps = random_amplitudes(np.random.default_rng(seed), 5)
    amps /= np.linalg.norm(amps, axis=1, keepdims=True)
    e = delta_x_operator(build_coin(spec)).expectation(amps)
    assert np.all(np.abs(e) <= 1 + 1e-12)


def test_mean_position_matches_direct_moment():
    lat = Lattice(256)
    s = gaussian_packet(lat, 100.3, 0.2, 5, (1, 0))
    p = position_distribution(s)
    assert mean_position(s) == pytest.approx(p @ np.arange(256), abs=1e-9)


def test_mean_position_across_the_origin():
    lat = Lattice(256)
    s = gaussian_packet(lat, 0.0, 0.0, 5, (1, 0))
    assert mean_position(s) == pytest.approx(0.0, abs=1e-9)


def test_seam_error():
    lat = Lattice(64)
    amps = np.zeros((64, 2), complex)
    amps[0, 0] = amps[32, 0] = 1 / math.sqrt(2)
    with pytest.raises(SeamError):
        mean_position(WalkerState(lat, amps), center=0)


def test_packet_center_wraps():
    p = np.zeros(100)
    p[[98, 99, 0, 1, 2]] = 0.2
    assert packet_center(p) == 0


def zitter_setup():
    lat = Lattice(512)
    state = gaussian_packet(lat, 256, math.pi / 2, 25, (1, 0))
    return state, StepConfig(build_coin(hadamard()))


def test_simulated_and_analytic_series_agree():
    state, cfg = zitter_setup()
    sim = delta_x_series_simulated(state, cfg, 200)
    ana = delta_x_series_analytic(band_decompose(dft(state), hadamard()), hadamard(), 200)
    assert np.max(np.abs(sim.values - ana.values)) < 1e-8
    assert sim.omega_pred == pytest.approx(math.pi / 2, abs=1e-12)


@given(coin_specs(), st.integers(0, 1000))
def test_series_agree_for_random_states(spec, seed):
    lat = Lattice(64)
    amps = np.zeros((64, 2), complex)
    amps[24:40] = random_amplitudes(np.random.default_rng(seed), 16)
    s = WalkerState(lat, amps)
    sim = delta_x_series_simulated(s, StepConfig(build_coin(spec)), 4)
    ana = delta_x_series_analytic(band_decompose(dft(s), spec), spec, 4)
    assert np.max(np.abs(sim.values - ana.values)) < 1e-10


def test_zitterbewegung_frequency():
    state, cfg = zitter_setup()
    omega = estimate_frequency(delta_x_series_simulated(state, cfg, 200))
    assert abs(omega - math.pi / 2) < 0.02 * math.pi / 2


def test_single_band_has_no_oscillation():
    lat = Lattice(512)
    s = gaussian_packet(lat, 256, math.pi / 2, 25, "plus", hadamard())
    series = delta_x_series_simulated(s, StepConfig(build_coin(hadamard())), 200)
    assert series.amplitude < 1e-8
    with pytest.raises(NoOscillationError):
        estimate_frequency(series)


def test_series_rejects_potential():
    lat = Lattice(64)
    cfg = StepConfig(build_coin(hadamard()), make_step_potential(lat, 40, 1.0))
    with pytest.raises(ValueError, match="free walk"):
        delta_x_series_simulated(point_state(lat, 10), cfg, 5)


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.3])
def test_frequency_of_synthetic_cosine(omega):
    t = np.arange(200)
    assert estimate_frequency(np.cos(omega * t) + 0.3) == pytest.approx(omega, abs=1e-3)


def test_frequency_needs_enough_samples():
    with pytest.raises(ValueError, match="64"):
        estimate_frequency(np.cos(np.arange(30)))


def test_standing_momentum():
    assert standing_momentum(hadamard()) == pytest.approx(math.pi / 2, abs=1e-15)
    assert standing_momentum(dirac_coin(DiracParams(0.2))) == 0.0


@given(coin_specs())
def test_standing_momenta_zero_velocity(spec):
    for k in standing_momenta(spec):
        vp, _ = group_velocity(spec, k)
        assert abs(vp) < 1e-9


def test_dirac_standing_packet_frequency():
    params = DiracParams(0.2)  # gamma = 0.1
    spec = dirac_coin(params)
    k_star = standing_momentum(spec)
    lat = Lattice(512)
    s = gaussian_packet(lat, 256, k_star, 25, (1, 0))
    omega = estimate_frequency(delta_x_series_simulated(s, StepConfig(build_coin(spec)), 200))
    ep, _, _ = dirac_dispersion(params, k_star)
    assert omega == pytest.approx(2 * abs(ep), rel=0.05)
    assert predicted_frequency(spec, k_star) == pytest.approx(2 * abs(ep), rel=1e-12)


def test_coarse_grain_preserves_mass():
    p = np.random.default_rng(0).random(40)
    assert coarse_grain(p, 4).sum() == pytest.approx(4 * p.sum())


def test_local_maxima_on_ring():
    q = np.array([3.0, 1, 2, 1, 0, 0])
    assert list(local_maxima(q)) == [0, 2]


def test_two_horns_dominant():
    lat = Lattice(512)
    s = point_state(lat, 256, np.array([1, 1j]) / math.sqrt(2))
    p = position_distribution(evolve(s, StepConfig(build_coin(hadamard())), 200).final)
    left, right = dominant_horns(p, 256)
    target = 200 / math.sqrt(2)
    assert abs(left + target) <= 4 and abs(right - target) <= 4
    assert set([256 + left, 256 + right]) <= set(horn_positions(p))


def test_delta_x_identity_coin():
    assert np.allclose(delta_x_operator(build_coin(CoinSpec(0.0, (0, 0, 1)))).matrix, np.diag([1, -1]))


@given(coin_specs())
def test_delta_x_hermitian_traceless(spec):
    m = delta_x_operator(build_coin(spec)).matrix
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    assert abs(np.trace(m)) < 1e-12


def test_identity_walk_series_is_one():
    lat = Lattice(512)
    s = gaussian_packet(lat, 200, 0.0, 4, (1, 0))
    series = delta_x_series_simulated(s, StepConfig(build_coin(CoinSpec(0.0, (0, 0, 1)))), 64)
    assert np.allclose(series.values, 1.0, atol=1e-12)


def test_mean_position_two_hadamard_steps_by_hand():
    # (1,0) at x=0: step 1 gives i/sqrt2 (|1,up> + |-1,down>);
    # step 2 gives -1/2 at (2,up), (0,down), (0,up) and +1/2 at (-2,down)
    lat = Lattice(16)
    s = evolve(point_state(lat, 0, (1, 0)), StepConfig(build_coin(hadamard())), 2).final
    assert np.allclose(s.amplitudes[2], [-0.5, 0])
    assert np.allclose(s.amplitudes[0], [-0.5, -0.5])
    assert np.allclose(s.amplitudes[14], [0, 0.5])
    assert mean_position(s) == pytest.approx(0.0, abs=1e-12)
