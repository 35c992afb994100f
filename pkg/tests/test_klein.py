import math

import numpy as np
import pytest

from dtqw_lab.coin import build_coin, hadamard, identity
from dtqw_lab.evolution import StepConfig, evolve, region_depth
from dtqw_lab.klein import (
    PacketParams,
    fit_decay_rate,
    mean_velocity,
    run_confinement,
    run_klein,
    wall_region,
)
from dtqw_lab.spectral import EVANESCENT, TRANSMITTED_CROSS, TRANSMITTED_SAME
from dtqw_lab.state import Lattice, position_distribution

LAT = Lattice(2048)
PACKET = PacketParams(824, 0.0, 10, "plus")


@pytest.fixture(scope="module")
def runs():
    return {phi: run_klein(hadamard(), PACKET, LAT, 1024, phi, 1000) for phi in (0.0, math.pi / 2, math.pi)}


def test_fit_decay_rate_recovers_exponential():
    d = np.arange(5, 31)
    assert fit_decay_rate(np.exp(-0.4 * d), d) == pytest.approx(0.4)


def test_zero_phase_equals_free_walk(runs):
    rec = runs[0.0]
    free = evolve(PACKET.build(LAT, hadamard()), StepConfig(build_coin(hadamard())), 1000).final
    depth = region_depth(np.arange(2048) > 1024)
    expected = position_distribution(free)[depth > 30].sum()
    assert abs(rec.mass_beyond[-1, 0] - expected) < 1e-10
    assert rec.prediction.weights[TRANSMITTED_SAME] == 1.0


def test_quarter_phase_is_evanescent(runs):
    rec = runs[math.pi / 2]
    assert rec.mass_beyond[:, 0].max() < 1e-8
    assert rec.prediction.weights[EVANESCENT] == pytest.approx(1.0)
    assert rec.decay_rate > 0.05


def test_half_phase_is_klein_transmission(runs):
    rec = runs[math.pi]
    after = rec.times > rec.arrival_time
    assert rec.mass_beyond[after, 0].max() > 0.1
    assert abs(rec.decay_rate) < 1e-3
    assert rec.prediction.weights[TRANSMITTED_CROSS] == pytest.approx(1.0)


def test_norm_conserved(runs):
    for rec in runs.values():
        assert rec.norm_drift < 1e-12
        assert np.all((rec.mass_beyond >= 0) & (rec.mass_beyond <= 1 + 1e-12))


@pytest.mark.parametrize("phi", [0.3, 1.0, 1.3, 2.2, 2.6, -0.5, -2.5])
def test_classifier_agrees_with_dynamics(phi):
    rec = run_klein(hadamard(), PACKET, LAT, 1024, phi, 1000)
    w = rec.prediction.weights
    if w[EVANESCENT] == pytest.approx(1.0, abs=1e-12):
        assert rec.decay_rate > 0.05
    if w[TRANSMITTED_SAME] + w[TRANSMITTED_CROSS] >= 0.9:
        assert abs(rec.decay_rate) < 1e-3


def test_packet_must_move_toward_step():
    with pytest.raises(ValueError, match="not incident"):
        run_klein(hadamard(), PacketParams(824, 0.0, 10, "minus"), LAT, 1024, math.pi, 1000)


def test_packet_must_start_left_of_step():
    with pytest.raises(ValueError, match="left of the step"):
        run_klein(hadamard(), PacketParams(1100, 0.0, 10, "plus"), LAT, 1024, math.pi, 1000)


def test_run_must_outlast_arrival():
    with pytest.raises(ValueError, match="before the packet"):
        run_klein(hadamard(), PACKET, LAT, 1024, math.pi, 100)


def test_mean_velocity_of_band_packet():
    s = PACKET.build(LAT, hadamard())
    assert mean_velocity(s, hadamard()) == pytest.approx(1 / math.sqrt(2), rel=1e-2)


def test_wall_region_shapes():
    lat = Lattice(20)
    box = wall_region(lat, (5, 15))
    assert not box[5:15].any() and box[:5].all() and box[15:].all()
    one = wall_region(lat, (12,))
    assert list(np.flatnonzero(one)) == [0, 1, 2, 13, 14, 15, 16, 17, 18, 19]
    with pytest.raises(ValueError, match="no interior"):
        wall_region(lat, (7, 8))


BOX = Lattice(512)
BOX_PACKET = PacketParams(256, 0.0, 5, "plus")


def test_two_walls_confine():
    rec = run_confinement(hadamard(), BOX_PACKET, BOX, (206, 306), math.pi / 2, 2000)
    assert rec.max_outside < 1e-6
    assert rec.channels_closed
    assert rec.norm_drift < 1e-12


def test_zero_phase_walls_do_not_confine():
    rec = run_confinement(hadamard(), BOX_PACKET, BOX, (206, 306), 0.0, 400)
    assert rec.max_outside > 0.5
    assert not rec.channels_closed


def test_one_wall_reflects():
    lat = Lattice(1024)
    rec = run_confinement(hadamard(), PacketParams(400, 0.0, 5, "plus"), lat, (500,), math.pi / 2, 300)
    x = rec.mean_position
    v_in = (x[60] - x[10]) / 50
    v_out = (x[290] - x[240]) / 50
    assert v_in > 0
    assert v_out == pytest.approx(-v_in, rel=0.05)


def test_confinement_needs_gapped_coin():
    with pytest.raises(ValueError, match="dilation"):
        run_confinement(identity(), BOX_PACKET, BOX, (206, 306))
