import math
from types import SimpleNamespace

import numpy as np
import pytest

from uavplace.channel import (
    EnvironmentParams,
    RadioConfig,
    required_power,
    uav_total_power,
    uav_total_rate,
    uav_ue_sinr,
)
from uavplace.geometry import Point2
from uavplace.network import (
    allocate_power,
    cell_bandwidth,
    fleet_geometry,
    link_state,
    network_sinr,
    uav_power_totals,
)
from uavplace.placement import UavPlacement

C = 299_792_458.0
CFG = RadioConfig()
ENV = EnvironmentParams()


def oracle_loss(h, r):
    theta = math.degrees(math.atan2(h, r))
    p = 1.0 / (1.0 + 9.61 * math.exp(-0.16 * (theta - 9.61)))
    fspl = 20 * math.log10(4 * math.pi * 2e9 * math.sqrt(h * h + r * r) / C)
    return fspl + p * 1.0 + (1 - p) * 20.0


# two UAVs whose discs overlap around x = 500
FLEET = (
    UavPlacement(Point2(400.0, 300.0), 120.0, 150.0, 1e9),
    UavPlacement(Point2(600.0, 300.0), 100.0, 150.0, 1e9),
)
UES = np.array([[380.0, 310.0], [500.0, 300.0], [640.0, 290.0]])
GBS = (0.0, 0.0)
SERVING = np.array([1, 1, 2])
POWER = np.array([2.0, 5.0, 3.0])


def toy_assoc():
    bw = cell_bandwidth(SERVING, 2, CFG)
    return SimpleNamespace(serving=SERVING, power=POWER, bandwidth=bw, rate=np.array([1e6, 2e6, 3e6]))


def oracle_sinr(i):
    """Straight-line evaluation: own signal over GBS, overlapping UAVs and noise."""
    own = SERVING[i] - 1
    b = 20e6 / (2 if own == 0 else 1)
    x, y = UES[i]
    u = FLEET[own]
    signal = POWER[i] * 10 ** (-oracle_loss(u.altitude, math.hypot(x - u.location.x, y - u.location.y)) / 10)
    i_g = 1e4 * math.hypot(x - GBS[0], y - GBS[1]) ** -6.5
    i_o = 0.0
    for j, v in enumerate(FLEET):
        r = math.hypot(x - v.location.x, y - v.location.y)
        if j != own and r <= v.radius:
            p_j = POWER[SERVING == j + 1].sum()
            i_o += p_j * 10 ** (-oracle_loss(v.altitude, r) / 10) * b / 20e6
    return signal / (i_g + i_o + b * 10 ** (-17.4))


def test_scalar_sinr_matches_oracle():
    a = toy_assoc()
    for i in range(3):
        got = uav_ue_sinr(i, SERVING[i] - 1, FLEET, a, CFG, ENV, ue_positions=UES, gbs_position=GBS)
        assert got == pytest.approx(oracle_sinr(i), rel=1e-9)


def test_vectorised_sinr_matches_scalar():
    a = toy_assoc()
    geo = fleet_geometry(UES, GBS, FLEET, CFG, ENV)
    p_uav = uav_power_totals(SERVING, POWER, 2, CFG)
    vec = network_sinr(geo, SERVING, POWER, p_uav, a.bandwidth, CFG)
    for i in range(3):
        s = uav_ue_sinr(i, SERVING[i] - 1, FLEET, a, CFG, ENV, ue_positions=UES, gbs_position=GBS)
        assert vec[i] == pytest.approx(s, rel=1e-12)


def test_overlap_interferer_lowers_sinr():
    a = toy_assoc()
    # UE 1 sits in both discs; silencing UAV 1 must raise its SINR
    quiet = SimpleNamespace(**{**vars(a), "power": np.array([2.0, 5.0, 0.0])})
    loud = uav_ue_sinr(1, 0, FLEET, a, CFG, ENV, ue_positions=UES, gbs_position=GBS)
    calm = uav_ue_sinr(1, 0, FLEET, quiet, CFG, ENV, ue_positions=UES, gbs_position=GBS)
    assert calm > loud


def test_isolated_uav_reduces_to_snr():
    fleet = (UavPlacement(Point2(0.0, 0.0), 100.0, 50.0, 1e9),)
    ue = np.array([[10.0, 0.0]])
    a = SimpleNamespace(serving=np.array([1]), power=np.array([1.0]), bandwidth=np.array([20e6]))
    far = (1e7, 1e7)  # GBS interference vanishes at this range
    got = uav_ue_sinr(0, 0, fleet, a, CFG, ENV, ue_positions=ue, gbs_position=far)
    expect = 1.0 * 10 ** (-oracle_loss(100.0, 10.0) / 10) / (20e6 * 10 ** (-17.4))
    assert got == pytest.approx(expect, rel=1e-9)


def test_uav_totals():
    a = toy_assoc()
    assert uav_total_power(0, a) == pytest.approx(7.0)
    assert uav_total_power(1, a) == pytest.approx(3.0)
    assert uav_total_rate(0, a) == pytest.approx(3e6)
    empty = SimpleNamespace(serving=np.array([0, -1]), power=np.zeros(2), rate=np.zeros(2))
    assert (uav_total_power(0, empty), uav_total_rate(0, empty)) == (0.0, 0.0)


def test_totals_match_per_ue_oracle_power():
    # three UEs on one UAV: powers sized by the required-power formula, summed
    fleet = (UavPlacement(Point2(300.0, 300.0), 80.0, 60.0, 1e9),)
    ue = np.array([[300.0, 300.0], [340.0, 300.0], [300.0, 250.0]])
    serving = np.array([1, 1, 1])
    geo = fleet_geometry(ue, (0.0, 0.0), fleet, CFG, ENV)
    power, p_uav = allocate_power(geo, serving, CFG)
    b = 20e6 / 3
    tgt = max(10 ** 0.5, 2 ** (1e6 / b) - 1) * 10 ** 0.1
    c_tgt = b * math.log2(1 + tgt)
    i_g = np.array([1e4 * math.hypot(x, y) ** -6.5 for x, y in ue])
    loss = [oracle_loss(80.0, math.hypot(x - 300, y - 300)) for x, y in ue]
    expect = [required_power(c_tgt, b, loss[i], i_g[i], CFG) for i in range(3)]
    assert power == pytest.approx(expect, rel=1e-9)
    assert p_uav[0] == pytest.approx(sum(expect), rel=1e-9)


def test_allocate_meets_targets_and_budget():
    rng = np.random.default_rng(0)
    ue = rng.uniform(200, 800, size=(60, 2))
    fleet = (
        UavPlacement(Point2(350.0, 350.0), 150.0, 250.0, 1e9),
        UavPlacement(Point2(650.0, 650.0), 150.0, 250.0, 1e9),
    )
    serving = np.where(ue.sum(axis=1) < 1000, 1, 2)
    geo = fleet_geometry(ue, (0.0, 0.0), fleet, CFG, ENV)
    power, p_uav = allocate_power(geo, serving, CFG)
    assert np.all(p_uav <= CFG.p_uav * (1 + 1e-12))
    _, _, sinr, rate = link_state(geo, serving, power, CFG)
    admitted = power > 0
    assert np.all(sinr[admitted] > CFG.sinr_threshold)
    assert np.all(rate[admitted] >= CFG.c_min)


def test_cell_bandwidth_split():
    bw = cell_bandwidth(np.array([0, 0, 1, -1, 1, 1]), 1, CFG)
    assert bw.tolist() == [10e6, 10e6, 20e6 / 3, 0.0, 20e6 / 3, 20e6 / 3]
