"""System sumrate and the six placement constraints."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .channel import AltitudeBoundError, backhaul_capacity, max_radius_for_altitude, n_g_max
from .network import GBS, fleet_geometry, link_state

CONSTRAINT_IDS = ("C1", "C2", "C3", "C4", "C5", "C6")
CONSTRAINT_NAMES = {
    "C1": "coverage radius within altitude limit",
    "C2": "altitude within bounds",
    "C3": "per-UE minimum rate",
    "C4": "GBS capacity",
    "C5": "UAV backhaul capacity",
    "C6": "every UE associated",
}


@dataclass(frozen=True)
class ConstraintRecord:
    id: str
    satisfied: bool
    margin: float  # native unit: m, m, bps, bps, bps, UEs
    detail: Optional[int] = None  # worst violator: UAV index or UE index


@dataclass(frozen=True)
class ConstraintReport:
    records: Tuple[ConstraintRecord, ...]

    @property
    def all_satisfied(self) -> bool:
        return all(r.satisfied for r in self.records)

    def __getitem__(self, cid: str) -> ConstraintRecord:
        for r in self.records:
            if r.id == cid:
                return r
        raise KeyError(cid)

    def failed(self) -> Tuple[str, ...]:
        return tuple(r.id for r in self.records if not r.satisfied)


def _record(cid, margin, detail=None) -> ConstraintRecord:
    return ConstraintRecord(cid, bool(margin >= 0), float(margin), None if detail is None else int(detail))


def n_g_bound_capacity(cfg) -> float:
    """GBS load bound implied by the GBS association cap: ``N_G^max * c_min``."""
    return n_g_max(cfg) * cfg.c_min


def gbs_capacity(scenario) -> float:
    """Maximum aggregate rate the GBS can deliver (bps).

    ``radio.gbs_capacity`` overrides. The default is the band at the GBS's
    peak SINR, ``B * log2(1 + P_G / (B/N_G^max * N0))``, i.e. a UE at the 1 m
    clamp with the smallest per-UE bandwidth share.
    """
    cfg = scenario.radio
    if cfg.gbs_capacity is not None:
        return float(cfg.gbs_capacity)
    share = cfg.bandwidth / max(n_g_max(cfg), 1)
    return cfg.bandwidth * math.log2(1.0 + cfg.p_g / (share * cfg.n0))


def _recompute(fleet, assoc, scenario):
    cfg = scenario.radio
    geo = fleet_geometry(scenario.ue_positions, scenario.gbs_position, fleet, cfg, scenario.env)
    return link_state(geo, np.asarray(assoc.serving), np.asarray(assoc.power), cfg)


def sumrate(fleet: Sequence, assoc, scenario) -> float:
    """Total rate of all associated UEs, recomputed under full interference."""
    _, _, _, rate = _recompute(fleet, assoc, scenario)
    return float(rate.sum())


def backhaul_capacities(fleet: Sequence, scenario) -> np.ndarray:
    cfg = scenario.radio
    g = scenario.gbs_position
    return np.array([
        backhaul_capacity(
            math.sqrt((u.location[0] - g.x) ** 2 + (u.location[1] - g.y) ** 2 + u.altitude**2),
            u.backhaul_alloc, cfg,
        )
        for u in fleet
    ])


def check_constraints(fleet: Sequence, assoc, scenario) -> ConstraintReport:
    cfg = scenario.radio
    env = scenario.env
    serving = np.asarray(assoc.serving)
    n = len(serving)
    _, _, sinr, rate = _recompute(fleet, assoc, scenario)
    served = (serving >= 0) & (sinr > cfg.sinr_threshold)

    recs = []
    # C1
    if fleet:
        m = []
        for u in fleet:
            try:
                m.append(max_radius_for_altitude(u.altitude, cfg, env) - u.radius)
            except AltitudeBoundError:
                m.append(-math.inf)
        j = int(np.argmin(m))
        recs.append(_record("C1", m[j], j))
    else:
        recs.append(_record("C1", math.inf))
    # C2
    if fleet:
        m = [min(u.altitude - cfg.h_min, cfg.h_max - u.altitude) for u in fleet]
        j = int(np.argmin(m))
        recs.append(_record("C2", m[j], j))
    else:
        recs.append(_record("C2", math.inf))
    # C3: unserved UEs deliver zero rate
    eff = np.where(served, rate, 0.0) - cfg.c_min
    i = int(np.argmin(eff))
    recs.append(_record("C3", eff[i], i))
    # C4
    gbs_load = float(rate[serving == GBS].sum())
    recs.append(_record("C4", gbs_capacity(scenario) - gbs_load))
    # C5
    if fleet:
        load = np.bincount(serving[serving >= 1] - 1, weights=rate[serving >= 1], minlength=len(fleet))
        m = backhaul_capacities(fleet, scenario) - load
        j = int(np.argmin(m))
        recs.append(_record("C5", m[j], j))
    else:
        recs.append(_record("C5", math.inf))
    # C6
    short = n - int(served.sum())
    worst = int(np.flatnonzero(~served)[0]) if short else None
    recs.append(_record("C6", -abs(short), worst))
    return ConstraintReport(tuple(recs))
