import math

import numpy as np
import pytest

from uavplace.channel import InfeasibleRadiusError, RadioConfig, n_g_max
from uavplace.geometry import Point2
from uavplace.network import GBS, UNSERVED
from uavplace.placement import (
    FleetExhaustedError,
    evaluate_association,
    gbs_only,
    initial_gbs_association,
    initial_k,
    place,
    preliminary_k,
    reassociate,
    refine_placements,
    UavPlacement,
)
from uavplace.scenario import generate, make_scenario, flash_crowd


@pytest.fixture(scope="module")
def small():
    s = make_scenario(generate(flash_crowd(300), seed=4), seed=4)
    return s, place(s)


def test_preliminary_k_ceiling_against_arithmetic():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(1, 2000))
        c = float(rng.uniform(1e5, 5e6))
        cap = float(rng.uniform(1e6, 1e9))
        k = preliminary_k(n, c, cap)
        assert k == max(1, math.ceil(n * c / cap))
        assert (k - 1) * cap < n * c or k == 1
        assert k * cap >= n * c


def test_preliminary_k_exact_multiple_and_zero():
    assert preliminary_k(100, 1e6, 25e6) == 4
    assert preliminary_k(101, 1e6, 25e6) == 5
    assert preliminary_k(0, 1e6, 25e6) == 0


def test_initial_gbs_association_picks_strongest():
    s = make_scenario(generate(flash_crowd(500), seed=0))
    assoc, n_g = initial_gbs_association(s)
    assert n_g <= n_g_max(s.radio) and assoc.n_gbs == n_g
    d = np.hypot(*(s.ue_positions - np.array(s.gbs_position)).T)
    chosen = d[assoc.serving == GBS]
    others = d[assoc.serving != GBS]
    assert chosen.max() <= others.min()


def test_initial_gbs_caps_at_n_g_max():
    pts = 600 + np.random.default_rng(0).uniform(-30, 30, size=(100, 2))
    assoc, n_g = initial_gbs_association(make_scenario(pts))
    assert n_g == 41


def test_initial_k_zero_when_gbs_serves_all():
    s = make_scenario(np.array([[600.0, 601.0], [601.0, 600.0]]))
    _, n_g = initial_gbs_association(s)
    assert n_g == 2 and initial_k(s, n_g) == 0


def test_refine_covers_each_cluster():
    rng = np.random.default_rng(1)
    clusters = [rng.normal(c, 40, size=(25, 2)) for c in ((200, 200), (900, 900))]
    s = make_scenario(np.vstack(clusters).clip(0, 1200))
    fleet = refine_placements(clusters, s)
    for u, pts in zip(fleet, clusters):
        assert np.all(np.hypot(*(pts - np.array(u.location)).T) <= u.radius + 1e-9)
        assert s.radio.h_min <= u.altitude <= s.radio.h_max
        assert u.backhaul_alloc == pytest.approx(s.radio.bandwidth_mmwave_total / 2)


def test_refine_rejects_too_wide_cluster():
    s = make_scenario(np.array([[0.0, 0.0], [1200.0, 1200.0]]))
    wide = [np.array([[0.0, 0.0], [1200.0, 1200.0], [0.0, 1200.0]])]
    with pytest.raises(InfeasibleRadiusError):
        refine_placements(wide, s.replace(radio=RadioConfig(l_max_db=100.0)))


def test_reassociate_moves_failing_ue_to_nearest_taker():
    pts = np.array([[200.0, 200.0], [210.0, 200.0], [1000.0, 1000.0]])
    s = make_scenario(pts, gbs_position=(1200.0, 0.0))
    fleet = (
        UavPlacement(Point2(205.0, 200.0), 40.0, 5.0, 1e9),
        UavPlacement(Point2(1000.0, 1000.0), 40.0, 1.0, 1e9),
    )
    # UE 0 starts unserved; UAV 0 is nearest and idle enough to take it
    assoc = evaluate_association(s, fleet, [UNSERVED, 1, 2], [0.0, 1e-3, 1e-3])
    new, changed = reassociate(assoc, fleet, s)
    assert changed and new.serving[0] == 1


def test_reassociate_leaves_unserved_without_taker():
    pts = np.array([[100.0, 100.0], [1100.0, 1100.0]])
    s = make_scenario(pts, radio=RadioConfig(l_max_db=90.0))
    fleet = (UavPlacement(Point2(1100.0, 1100.0), 40.0, 1.0, 1e9),)
    assoc = evaluate_association(s, fleet, [UNSERVED, 1], [0.0, 1e-3])
    new, _ = reassociate(assoc, fleet, s)
    assert new.serving[0] == UNSERVED


def test_place_small_is_valid(small):
    s, r = small
    assert r.valid and r.status == "ok"
    assert r.association.n_unserved == 0
    assert r.k == r.trace[-1].k or r.k <= r.trace[-1].k
    serving = r.association.serving
    for j, u in enumerate(r.fleet):
        m = s.ue_positions[serving == j + 1]
        assert len(m) > 0
        assert np.all(np.hypot(*(m - np.array(u.location)).T) <= u.radius + 1e-6)
    assert r.sumrate > gbs_only(s).sumrate


def test_place_deterministic(small):
    s, r = small
    again = place(s)
    assert again.k == r.k and again.sumrate == r.sumrate
    assert np.array_equal(again.association.serving, r.association.serving)


def test_tighter_c_min_needs_no_fewer_uavs(small):
    s, r = small
    tight = place(s.replace(radio=RadioConfig(c_min=2e6)))
    assert tight.k >= r.k


def test_fleet_exhausted_returns_snapshot():
    s = make_scenario(generate(flash_crowd(300), seed=4), radio=RadioConfig(k_max=2))
    with pytest.raises(FleetExhaustedError) as ei:
        place(s)
    snap = ei.value.result
    assert snap is not None and snap.status == "fleet-exhausted" and not snap.valid


def test_gbs_only_baseline():
    s = make_scenario(generate(flash_crowd(300), seed=1))
    b = gbs_only(s)
    assert b.k == 0 and b.status == "baseline"
    assert b.association.n_gbs + b.association.n_unserved == s.n
