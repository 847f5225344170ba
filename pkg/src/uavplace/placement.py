"""Data-driven 3D placement of UAV base stations.

The loop: associate the strongest UEs with the GBS, size an initial fleet,
cluster the remaining UEs with balanced k-means, then alternate coverage
refinement (minimum covering circle per cluster, altitude from its radius)
with re-association of UEs whose SINR misses the threshold. If any UE stays
unserved or a constraint fails, the fleet grows by one and clustering
restarts.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import evaluation
from .channel import (
    InfeasibleRadiusError,
    altitude_for_radius,
    backhaul_capacity,
    n_g_max,
    target_sinr,
)
from .clustering import balanced_kmeans
from .geometry import Point2, min_covering_circle
from .network import (
    GBS,
    UNSERVED,
    allocate_power,
    cell_bandwidth,
    fleet_geometry,
    link_state,
)
from .scenario import Scenario

log = logging.getLogger(__name__)

MIN_RADIUS = 1.0  # m, singleton clusters
CENTER_TOL = 0.01  # m
MAX_INNER_ITERS = 50
PATIENCE = 5


@dataclass(frozen=True)
class UavPlacement:
    location: Point2
    altitude: float
    radius: float
    backhaul_alloc: float  # Hz


@dataclass(frozen=True, eq=False)
class Association:
    """Per-UE serving cell (-1 unserved, 0 GBS, j+1 UAV j) and link figures."""

    serving: np.ndarray
    sinr: np.ndarray
    bandwidth: np.ndarray  # Hz
    rate: np.ndarray  # bps
    power: np.ndarray  # mW allocated by the serving UAV; 0 for GBS/unserved

    def __post_init__(self):
        for name in ("serving", "sinr", "bandwidth", "rate", "power"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_unserved(self) -> int:
        return int(np.sum(self.serving == UNSERVED))

    @property
    def n_gbs(self) -> int:
        return int(np.sum(self.serving == GBS))

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.serving == j + 1)


@dataclass(frozen=True)
class TraceEntry:
    k: int
    inner_iterations: int
    unserved: int
    sumrate: float
    constraints_ok: bool
    note: str = ""


@dataclass(frozen=True)
class PlacementResult:
    fleet: Tuple[UavPlacement, ...]
    association: Association
    sumrate: float
    constraint_report: "evaluation.ConstraintReport"
    trace: Tuple[TraceEntry, ...] = ()
    n_g: int = 0
    status: str = "ok"  # or "fleet-exhausted"

    @property
    def k(self) -> int:
        return len(self.fleet)

    @property
    def valid(self) -> bool:
        return self.association.n_unserved == 0 and self.constraint_report.all_satisfied


class FleetExhaustedError(RuntimeError):
    """No valid placement within ``k_max`` UAVs; ``result`` holds the best attempt."""

    def __init__(self, message: str, result: Optional[PlacementResult] = None):
        super().__init__(message)
        self.result = result


# --------------------------------------------------------------------------
# initialisation

def _gbs_snr_no_interference(scenario: Scenario) -> np.ndarray:
    cfg = scenario.radio
    ue = scenario.ue_positions
    g = scenario.gbs_position
    d = np.maximum(np.hypot(ue[:, 0] - g.x, ue[:, 1] - g.y), 1.0)
    # full band: worst-case noise for any later share of B
    return cfg.p_g * d ** (-cfg.alpha) / (cfg.bandwidth * cfg.n0)


def evaluate_association(scenario: Scenario, fleet: Sequence[UavPlacement], serving, ue_power=None) -> Association:
    cfg = scenario.radio
    serving = np.asarray(serving, dtype=int)
    geo = fleet_geometry(scenario.ue_positions, scenario.gbs_position, fleet, cfg, scenario.env)
    if ue_power is None:
        ue_power = np.zeros(len(serving))
    bw, _, sinr, rate = link_state(geo, serving, ue_power, cfg)
    return Association(serving, sinr, bw, rate, np.asarray(ue_power, dtype=float))


def initial_gbs_association(scenario: Scenario) -> Tuple[Association, int]:
    """Associate the top-SINR GBS candidates (interference-free) with the GBS."""
    cfg = scenario.radio
    snr = _gbs_snr_no_interference(scenario)
    cand = np.flatnonzero(snr > cfg.sinr_threshold)
    n_g = min(len(cand), n_g_max(cfg))
    chosen = cand[np.argsort(-snr[cand], kind="stable")[:n_g]]
    serving = np.full(scenario.n, UNSERVED)
    serving[chosen] = GBS
    return evaluate_association(scenario, (), serving), n_g


def preliminary_k(n_remaining: int, c_min: float, c_hat_max: float) -> int:
    if n_remaining <= 0:
        return 0
    return max(1, math.ceil(n_remaining * c_min / c_hat_max))


def ideal_uav_capacity(scenario: Scenario, k: int) -> float:
    """Interference-free deliverable rate of one UAV with ``k`` sharing the backhaul.

    The backhaul is taken at the worst-case range (area diagonal at the
    maximum altitude); the access side is the full band at the SINR threshold.
    """
    cfg = scenario.radio
    w, h = scenario.area
    d = math.sqrt(w * w + h * h + cfg.h_max**2)
    backhaul = backhaul_capacity(d, cfg.bandwidth_mmwave_total / max(k, 1), cfg, enforce_threshold=False)
    access = cfg.bandwidth * math.log2(1.0 + cfg.sinr_threshold)
    return min(backhaul, access)


def initial_k(scenario: Scenario, n_g: int) -> int:
    """Starting fleet size; 0 when the GBS serves everyone."""
    cfg = scenario.radio
    n_rem = scenario.n - n_g
    if n_rem <= 0:
        return 0
    k = preliminary_k(n_rem, cfg.c_min, ideal_uav_capacity(scenario, 1))
    k = preliminary_k(n_rem, cfg.c_min, ideal_uav_capacity(scenario, k))
    k = min(k, n_rem)
    if k > cfg.k_max:
        raise FleetExhaustedError(f"initial fleet size {k} exceeds k_max={cfg.k_max}")
    return k


# --------------------------------------------------------------------------
# refinement and re-association

def _placement_for(points: np.ndarray, k: int, scenario: Scenario, seed: int) -> UavPlacement:
    cfg = scenario.radio
    circle = min_covering_circle(points, seed=seed)
    altitude = altitude_for_radius(max(circle.radius, MIN_RADIUS), cfg, scenario.env)
    return UavPlacement(circle.center, altitude, circle.radius, cfg.bandwidth_mmwave_total / k)


def refine_placements(clusters: Sequence[np.ndarray], scenario: Scenario, seed: int = 0) -> List[UavPlacement]:
    """Minimum covering circle of each cluster gives location, radius and altitude.

    Raises :class:`~uavplace.channel.InfeasibleRadiusError` for a cluster too
    wide to cover within the path-loss limit.
    """
    if not len(clusters):
        raise ValueError("no clusters to refine")
    k = len(clusters)
    return [_placement_for(np.asarray(c, dtype=float), k, scenario, seed) for c in clusters]


def _refine_fleet(serving, prev: Optional[List[UavPlacement]], k, scenario, seed):
    """Refine every non-empty cluster; empty clusters keep their previous placement."""
    ue = scenario.ue_positions
    fleet = []
    for j in range(k):
        idx = np.flatnonzero(serving == j + 1)
        if len(idx):
            fleet.append(_placement_for(ue[idx], k, scenario, seed))
        else:
            fleet.append(prev[j])
    return fleet


def _member_power(geo, members, bw_new, uav_power, cfg, j):
    """Power UAV ``j`` would need for ``members`` at bandwidth ``bw_new`` each."""
    contrib = geo.in_disc[members] * geo.gain[members] * uav_power[None, :]
    contrib[:, j] = 0.0
    interf = cfg.p_g * geo.gbs_gain[members] + contrib.sum(axis=1) * (bw_new / cfg.bandwidth)
    return (interf + bw_new * cfg.n0) * target_sinr(bw_new, cfg) / geo.gain[members, j]


def reassociate(
    assoc: Association,
    fleet: Sequence[UavPlacement],
    scenario: Scenario,
    geo=None,
    tabu: Optional[set] = None,
) -> Tuple[Association, bool]:
    """Move unserved or below-threshold UEs to the nearest UAV that can take them.

    A UAV accepts a UE when the path loss is within ``l_max`` and the powers
    of its enlarged cell (bandwidth re-split included) fit the UAV budget
    under the current interference. UEs with no taker become unserved.
    Candidates are tried in increasing ground range.

    ``tabu`` collects ``(ue, uav)`` pairs that already failed; they are not
    retried, which bounds the number of moves across repeated calls.
    """
    cfg = scenario.radio
    if not len(fleet):
        raise ValueError("re-association needs a non-empty fleet")
    if geo is None:
        geo = fleet_geometry(scenario.ue_positions, scenario.gbs_position, fleet, cfg, scenario.env)
    if tabu is None:
        tabu = set()
    serving = np.array(assoc.serving)
    k = len(fleet)
    uav_power = np.bincount(
        serving[serving >= 1] - 1, weights=np.asarray(assoc.power)[serving >= 1], minlength=k
    )
    counts = np.bincount(serving[serving >= 1] - 1, minlength=k)
    failing = np.flatnonzero((serving == UNSERVED) | (np.asarray(assoc.sinr) <= cfg.sinr_threshold))
    changed = False
    for i in failing:
        i = int(i)
        cur = int(serving[i])
        if cur >= 1:
            tabu.add((i, cur - 1))
        moved = False
        for j in np.argsort(geo.ground_range[i], kind="stable"):
            j = int(j)
            if (i, j) in tabu or geo.loss_db[i, j] > cfg.l_max_db:
                continue
            members = np.append(np.flatnonzero(serving == j + 1), i)
            need = _member_power(geo, members, cfg.bandwidth / (counts[j] + 1), uav_power, cfg, j)
            total = float(need.sum())
            if total <= cfg.p_uav:
                if cur >= 1:
                    counts[cur - 1] -= 1
                serving[i] = j + 1
                counts[j] += 1
                uav_power[j] = total
                moved = True
                break
        if not moved:
            serving[i] = UNSERVED
        changed |= serving[i] != cur
    if not changed:
        return assoc, False
    return Association(serving, assoc.sinr, cell_bandwidth(serving, k, cfg), assoc.rate, assoc.power), True


# --------------------------------------------------------------------------
# main loop

@dataclass
class _Attempt:
    fleet: List[UavPlacement]
    assoc: Association
    iterations: int
    note: str = ""


def _failing(assoc: Association, cfg) -> int:
    serving = np.asarray(assoc.serving)
    return int(np.sum((serving == UNSERVED) | ~(np.asarray(assoc.sinr) > cfg.sinr_threshold)))


def _settle(scenario: Scenario, serving: np.ndarray, k: int, seed: int, max_inner: int) -> _Attempt:
    """Refine/re-associate until the fleet and labels stop changing.

    Returns the iterate with the fewest failing UEs; gives up after
    ``PATIENCE`` iterations without improvement.
    """
    cfg = scenario.radio
    fleet: Optional[List[UavPlacement]] = None
    uav_power = None
    tabu: set = set()
    it = 0
    note = ""
    best = None
    stale = 0
    while True:
        it += 1
        prev_fleet = fleet
        fleet = _refine_fleet(serving, prev_fleet, k, scenario, seed)
        geo = fleet_geometry(scenario.ue_positions, scenario.gbs_position, fleet, cfg, scenario.env)
        ue_power, uav_power = allocate_power(geo, serving, cfg, uav_power)
        bw, _, sinr, rate = link_state(geo, serving, ue_power, cfg)
        assoc = Association(serving, sinr, bw, rate, ue_power)
        n_fail = _failing(assoc, cfg)
        if best is None or n_fail < best[0]:
            best = (n_fail, fleet, assoc, it)
            stale = 0
        else:
            stale += 1
        shift = 0.0
        if prev_fleet is not None:
            shift = max(
                math.hypot(a.location.x - b.location.x, a.location.y - b.location.y)
                for a, b in zip(fleet, prev_fleet)
            )
        if it >= max_inner:
            note = "inner iteration cap"
            break
        if stale >= PATIENCE:
            note = "no improvement"
            break
        assoc2, changed = reassociate(assoc, fleet, scenario, geo, tabu)
        if not changed and prev_fleet is not None and shift < CENTER_TOL:
            break
        serving = np.array(assoc2.serving)
    _, fleet, assoc, _ = best
    serving = np.array(assoc.serving)
    # anything still failing is unserved in the reported state
    fail = (serving >= 0) & ~(assoc.sinr > cfg.sinr_threshold)
    if fail.any():
        serving[fail] = UNSERVED
        power = np.where(fail, 0.0, assoc.power)
        geo = fleet_geometry(scenario.ue_positions, scenario.gbs_position, fleet, cfg, scenario.env)
        bw, _, sinr, rate = link_state(geo, serving, power, cfg)
        assoc = Association(serving, sinr, bw, rate, power)
    return _Attempt(fleet, assoc, it, note)


def _compact(scenario: Scenario, attempt: _Attempt) -> Tuple[Tuple[UavPlacement, ...], Association]:
    """Drop UAVs left without UEs and re-split the backhaul pool."""
    cfg = scenario.radio
    serving = np.array(attempt.assoc.serving)
    keep = [j for j in range(len(attempt.fleet)) if np.any(serving == j + 1)]
    if len(keep) == len(attempt.fleet):
        return tuple(attempt.fleet), attempt.assoc
    remap = np.full(len(attempt.fleet) + 1, UNSERVED)
    remap[0] = GBS
    for new, old in enumerate(keep):
        remap[old + 1] = new + 1
    serving = np.where(serving >= 0, remap[np.maximum(serving, 0)], UNSERVED)
    k = max(len(keep), 1)
    fleet = tuple(
        UavPlacement(attempt.fleet[j].location, attempt.fleet[j].altitude, attempt.fleet[j].radius,
                     cfg.bandwidth_mmwave_total / k)
        for j in keep
    )
    return fleet, evaluate_association(scenario, fleet, serving, attempt.assoc.power)


def _finish(scenario, fleet, assoc, trace, n_g, status="ok") -> PlacementResult:
    report = evaluation.check_constraints(fleet, assoc, scenario)
    return PlacementResult(
        tuple(fleet), assoc, evaluation.sumrate(fleet, assoc, scenario), report, tuple(trace), n_g, status
    )


def _better(a: PlacementResult, b: Optional[PlacementResult]) -> bool:
    if b is None:
        return True
    return (a.association.n_unserved, -a.sumrate) < (b.association.n_unserved, -b.sumrate)


def place(scenario: Scenario, *, seed: Optional[int] = None, max_inner: int = MAX_INNER_ITERS) -> PlacementResult:
    """Run the full placement; raises :class:`FleetExhaustedError` past ``k_max``."""
    cfg = scenario.radio
    seed = scenario.seed if seed is None else seed
    gbs_assoc, n_g = initial_gbs_association(scenario)
    trace: List[TraceEntry] = []

    try:
        k = initial_k(scenario, n_g)
    except FleetExhaustedError as e:
        snap = _finish(scenario, (), gbs_assoc, trace, n_g, "fleet-exhausted")
        raise FleetExhaustedError(str(e), snap) from None
    if k == 0:
        res = _finish(scenario, (), gbs_assoc, trace, n_g)
        if res.valid:
            return res
        k = 1

    pool = np.flatnonzero(gbs_assoc.serving != GBS)
    best: Optional[PlacementResult] = None
    while k <= min(cfg.k_max, len(pool)):
        clusters = balanced_kmeans(scenario.ue_positions[pool], k, seed=seed)
        serving = np.array(gbs_assoc.serving)
        serving[pool] = clusters.labels + 1
        try:
            attempt = _settle(scenario, serving, k, seed, max_inner)
        except InfeasibleRadiusError as e:
            log.debug("k=%d: %s", k, e)
            trace.append(TraceEntry(k, 0, len(pool), 0.0, False, "infeasible radius"))
            k += 1
            continue
        fleet, assoc = _compact(scenario, attempt)
        res = _finish(scenario, fleet, assoc, (), n_g)
        trace.append(TraceEntry(k, attempt.iterations, assoc.n_unserved, res.sumrate,
                                res.constraint_report.all_satisfied, attempt.note))
        log.debug("k=%d unserved=%d ok=%s", k, assoc.n_unserved, res.valid)
        if res.valid:
            return _finish(scenario, fleet, assoc, trace, n_g)
        if _better(res, best):
            best = res
        k += 1

    if best is None:
        best = _finish(scenario, (), gbs_assoc, (), n_g)
    snap = _finish(scenario, best.fleet, best.association, trace, n_g, "fleet-exhausted")
    raise FleetExhaustedError(f"no valid placement with up to {cfg.k_max} UAVs", snap)


def gbs_only(scenario: Scenario) -> PlacementResult:
    """Baseline without UAVs: GBS association only, the rest unserved."""
    assoc, n_g = initial_gbs_association(scenario)
    return _finish(scenario, (), assoc, (), n_g, "baseline")
