"""Vectorised downlink state for a whole network: interference, power and SINR.

Cell labels follow the placement convention: ``-1`` unserved, ``0`` the GBS,
``j + 1`` UAV ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import (
    EnvironmentParams,
    RadioConfig,
    atg_loss_db,
    link_rate,
    target_sinr,
    terrestrial_gain,
)

UNSERVED = -1
GBS = 0


@dataclass(frozen=True)
class FleetGeometry:
    """Distance-derived matrices for N UEs against k UAVs."""

    ground_range: np.ndarray  # (N, k) horizontal distance, m
    loss_db: np.ndarray  # (N, k) mean ATG path loss
    gain: np.ndarray  # (N, k) linear ATG gain
    in_disc: np.ndarray  # (N, k) UE inside UAV coverage disc
    gbs_gain: np.ndarray  # (N,) terrestrial gain from the GBS
    uav_terrestrial: np.ndarray  # (N, k) power-law gain over the slant range

    @property
    def k(self) -> int:
        return self.gain.shape[1]


def fleet_geometry(
    ue_positions, gbs_position, fleet: Sequence, cfg: RadioConfig, env: EnvironmentParams
) -> FleetGeometry:
    ue = np.asarray(ue_positions, dtype=float)
    n, k = len(ue), len(fleet)
    if k:
        xy = np.array([u.location for u in fleet], dtype=float)
        h = np.array([u.altitude for u in fleet], dtype=float)
        radius = np.array([u.radius for u in fleet], dtype=float)
        r = np.hypot(ue[:, None, 0] - xy[None, :, 0], ue[:, None, 1] - xy[None, :, 1])
        loss = atg_loss_db(h[None, :], r, cfg.f_c, env)
        gain = 10.0 ** (-loss / 10.0)
        in_disc = r <= radius[None, :] + 1e-9
        slant = np.sqrt(r**2 + h[None, :] ** 2)
        uav_terr = terrestrial_gain(slant, cfg.alpha)
    else:
        r = loss = gain = uav_terr = np.zeros((n, 0))
        in_disc = np.zeros((n, 0), dtype=bool)
    d_g = np.hypot(ue[:, 0] - gbs_position[0], ue[:, 1] - gbs_position[1])
    return FleetGeometry(r, loss, gain, in_disc, terrestrial_gain(d_g, cfg.alpha), uav_terr)


def cell_bandwidth(serving: np.ndarray, k: int, cfg: RadioConfig) -> np.ndarray:
    """Equal split of ``cfg.bandwidth`` among each cell's associated UEs."""
    serving = np.asarray(serving)
    counts = np.bincount(serving[serving >= 0], minlength=k + 1)
    bw = np.zeros(len(serving))
    on = serving >= 0
    bw[on] = cfg.bandwidth / counts[serving[on]]
    return bw


def uav_power_totals(serving: np.ndarray, ue_power: np.ndarray, k: int, cfg: RadioConfig) -> np.ndarray:
    """Per-UAV transmit power: sum over its UEs, capped at the UAV budget."""
    serving = np.asarray(serving)
    on = serving >= 1
    tot = np.bincount(serving[on] - 1, weights=np.asarray(ue_power)[on], minlength=k)
    return np.minimum(tot, cfg.p_uav)


def uav_ue_interference(
    geo: FleetGeometry, serving, uav_power, bandwidth, cfg: RadioConfig
) -> np.ndarray:
    """Interference at UAV-served UEs: GBS power plus overlapping UAVs.

    An overlapping UAV contributes the share of its power that falls in the
    UE's bandwidth. Entries for non-UAV UEs are zero.
    """
    serving = np.asarray(serving)
    out = np.zeros(len(serving))
    on = serving >= 1
    if not on.any():
        return out
    idx = np.flatnonzero(on)
    own = serving[idx] - 1
    contrib = geo.in_disc[idx] * geo.gain[idx] * np.asarray(uav_power)[None, :]
    contrib[np.arange(len(idx)), own] = 0.0
    share = np.asarray(bandwidth)[idx] / cfg.bandwidth
    out[idx] = cfg.p_g * geo.gbs_gain[idx] + contrib.sum(axis=1) * share
    return out


def gbs_ue_interference(geo: FleetGeometry, uav_power) -> np.ndarray:
    return geo.uav_terrestrial @ np.asarray(uav_power, dtype=float) if geo.k else np.zeros(len(geo.gbs_gain))


def network_sinr(
    geo: FleetGeometry, serving, ue_power, uav_power, bandwidth, cfg: RadioConfig
) -> np.ndarray:
    serving = np.asarray(serving)
    bw = np.asarray(bandwidth, dtype=float)
    sinr = np.zeros(len(serving))
    g = serving == GBS
    if g.any():
        interf = gbs_ue_interference(geo, uav_power)[g]
        sinr[g] = cfg.p_g * geo.gbs_gain[g] / (interf + bw[g] * cfg.n0)
    u = serving >= 1
    if u.any():
        interf = uav_ue_interference(geo, serving, uav_power, bw, cfg)[u]
        idx = np.flatnonzero(u)
        signal = np.asarray(ue_power)[idx] * geo.gain[idx, serving[idx] - 1]
        sinr[u] = signal / (interf + bw[u] * cfg.n0)
    return sinr


def _admit(serving, req, k, budget):
    """Per UAV, keep the cheapest UEs whose powers fit the budget; zero the rest."""
    power = req.copy()
    for j in range(k):
        idx = np.flatnonzero(serving == j + 1)
        if not len(idx):
            continue
        order = idx[np.argsort(req[idx], kind="stable")]
        over = np.cumsum(req[order]) > budget * (1 + 1e-12)
        power[order[over]] = 0.0
    return power


def allocate_power(
    geo: FleetGeometry,
    serving,
    cfg: RadioConfig,
    uav_power: Optional[np.ndarray] = None,
    *,
    max_sweeps: int = 50,
    rtol: float = 1e-6,
):
    """Per-UE transmit powers meeting each UE's target SINR.

    Jacobi sweeps: each sweep prices every UE against the interference
    produced by the previous sweep's UAV powers, then admits UEs per UAV in
    increasing power order up to the budget. Starts from ``uav_power`` when
    given (warm start), otherwise from zero interference.

    Returns ``(ue_power, uav_power)``.
    """
    serving = np.asarray(serving)
    k = geo.k
    bw = cell_bandwidth(serving, k, cfg)
    u = serving >= 1
    idx = np.flatnonzero(u)
    ue_power = np.zeros(len(serving))
    if k == 0 or not len(idx):
        return ue_power, np.zeros(k)
    own_gain = geo.gain[idx, serving[idx] - 1]
    tgt = target_sinr(bw[idx], cfg)
    noise = bw[idx] * cfg.n0
    p_uav = np.zeros(k) if uav_power is None else np.asarray(uav_power, dtype=float).copy()
    req = np.zeros(len(serving))
    for _ in range(max(1, max_sweeps)):
        interf = uav_ue_interference(geo, serving, p_uav, bw, cfg)[idx]
        req[idx] = (interf + noise) * tgt / own_gain
        ue_power = _admit(serving, req, k, cfg.p_uav)
        new = uav_power_totals(serving, ue_power, k, cfg)
        done = np.all(np.abs(new - p_uav) <= rtol * np.maximum(new, 1e-30))
        p_uav = new
        if done:
            break
    return ue_power, p_uav


def link_state(geo: FleetGeometry, serving, ue_power, cfg: RadioConfig):
    """``(bandwidth, uav_power, sinr, rate)`` for fixed powers."""
    serving = np.asarray(serving)
    bw = cell_bandwidth(serving, geo.k, cfg)
    p_uav = uav_power_totals(serving, ue_power, geo.k, cfg)
    sinr = network_sinr(geo, serving, ue_power, p_uav, bw, cfg)
    rate = np.where(serving >= 0, link_rate(sinr, bw, cfg), 0.0)
    return bw, p_uav, sinr, rate
