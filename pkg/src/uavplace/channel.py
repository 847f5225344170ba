"""Radio propagation, SINR, rate and power formulas.

Internal quantities are linear (mW, Hz, bps, m). Configuration objects keep
powers and thresholds in dB/dBm so that files round-trip exactly; the linear
values are exposed as properties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Clamp for terrestrial distances (UE coincident with the GBS).
MIN_TERRESTRIAL_DISTANCE = 1.0

RADIUS_TOL = 0.01  # m, bisection tolerance of max_radius_for_altitude
ALTITUDE_TOL = 0.1  # m, golden-section tolerance of altitude_for_radius


class ChannelError(ValueError):
    """Base class for channel-model errors."""


class InvalidGeometryError(ChannelError):
    pass


class AltitudeBoundError(ChannelError):
    pass


class InfeasibleRadiusError(ChannelError):
    """No altitude keeps the cell-edge path loss within ``l_max``."""

    def __init__(self, radius: float, best_loss_db: float, l_max_db: float):
        super().__init__(
            f"radius {radius:.2f} m infeasible: best edge loss "
            f"{best_loss_db:.2f} dB > {l_max_db:.2f} dB"
        )
        self.radius = radius
        self.best_loss_db = best_loss_db


def db_to_linear(x_db):
    out = 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    out = 10.0 * np.log10(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnvironmentParams:
    """S-curve LoS model parameters and mean excess losses (dB)."""

    a: float = 9.61
    b: float = 0.16
    eta_los: float = 1.0
    eta_nlos: float = 20.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("environment parameters a and b must be positive")
        if not (self.eta_nlos >= self.eta_los >= 0):
            raise ValueError("need eta_nlos >= eta_los >= 0")


@dataclass(frozen=True)
class RadioConfig:
    """Radio and algorithm parameters. Defaults are the urban simulation setup."""

    p_g_dbm: float = 40.0
    p_uav_dbm: float = 20.0
    p_g_mmwave_dbm: float = 30.0
    g_tx: float = 1.0
    g_rx: float = 1.0
    alpha: float = 6.5
    f_c: float = 2e9
    f_c_mmwave: float = 28e9
    bandwidth: float = 20e6
    bandwidth_mmwave_total: float = 2000e6
    n0_dbm: float = -174.0  # per Hz
    sinr_threshold_db: float = 5.0
    sinr_threshold_mmwave_db: float = 30.0
    c_min: float = 1e6
    h_min: float = 20.0
    h_max: float = 400.0
    l_max_db: float = 119.0
    k_max: int = 100
    # SINR head-room above the minimum target when sizing per-UE power.
    power_margin_db: float = 1.0
    # None selects the default GBS capacity (see evaluation.gbs_capacity).
    gbs_capacity: Optional[float] = None
    # Gate backhaul capacity on the mmWave SNR threshold.
    enforce_mmwave_threshold: bool = False

    def __post_init__(self):
        if self.alpha <= 2:
            raise ValueError("terrestrial path-loss exponent must exceed 2")
        if not self.h_min < self.h_max:
            raise ValueError("need h_min < h_max")
        if self.h_min <= 0:
            raise ValueError("h_min must be positive")
        if self.bandwidth <= 0 or self.bandwidth_mmwave_total <= 0:
            raise ValueError("bandwidths must be positive")
        if self.c_min <= 0:
            raise ValueError("c_min must be positive")
        if self.k_max < 0:
            raise ValueError("k_max must be non-negative")
        if self.g_tx <= 0 or self.g_rx <= 0:
            raise ValueError("antenna gains must be positive")

    @property
    def p_g(self) -> float:
        return db_to_linear(self.p_g_dbm)

    @property
    def p_uav(self) -> float:
        return db_to_linear(self.p_uav_dbm)

    @property
    def p_g_mmwave(self) -> float:
        return db_to_linear(self.p_g_mmwave_dbm)

    @property
    def n0(self) -> float:
        """Noise power spectral density, mW/Hz."""
        return db_to_linear(self.n0_dbm)

    @property
    def sinr_threshold(self) -> float:
        return db_to_linear(self.sinr_threshold_db)

    @property
    def sinr_threshold_mmwave(self) -> float:
        return db_to_linear(self.sinr_threshold_mmwave_db)

    @property
    def power_margin(self) -> float:
        return db_to_linear(self.power_margin_db)


@dataclass(frozen=True)
class LinkBudget:
    path_loss_db: float
    received_power: float
    sinr: float
    rate: float


# --------------------------------------------------------------------------
# air-to-ground link

def _elevation_deg(h, r):
    # arctan2 gives 90 degrees at r == 0
    return np.degrees(np.arctan2(h, r))


def los_probability(h: float, r: float, env: EnvironmentParams) -> float:
    """Probability of a line-of-sight link from altitude ``h`` at ground range ``r``."""
    if h <= 0:
        raise InvalidGeometryError(f"altitude must be positive, got {h}")
    if r < 0:
        raise InvalidGeometryError(f"ground range must be non-negative, got {r}")
    theta = math.degrees(math.atan2(h, r))
    return 1.0 / (1.0 + env.a * math.exp(-env.b * (theta - env.a)))


def _fspl_db(d, f_c):
    return 20.0 * np.log10(4.0 * np.pi * f_c * d / SPEED_OF_LIGHT)


def atg_loss_db(h, r, f_c: float, env: EnvironmentParams):
    """Vectorised mean air-to-ground path loss (dB); no bound checks."""
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    theta = _elevation_deg(h, r)
    p_los = 1.0 / (1.0 + env.a * np.exp(-env.b * (theta - env.a)))
    d = np.hypot(r, h)
    return _fspl_db(d, f_c) + env.eta_los * p_los + env.eta_nlos * (1.0 - p_los)


def _check_altitude(h: float, cfg: RadioConfig) -> None:
    if not (cfg.h_min <= h <= cfg.h_max):
        raise AltitudeBoundError(
            f"altitude {h} m outside [{cfg.h_min}, {cfg.h_max}] m"
        )


def atg_path_loss(h: float, r: float, cfg: RadioConfig, env: EnvironmentParams) -> float:
    """Mean ATG path loss in dB for a UAV at altitude ``h`` and ground range ``r``."""
    _check_altitude(h, cfg)
    if r < 0:
        raise InvalidGeometryError(f"ground range must be non-negative, got {r}")
    return float(atg_loss_db(h, r, cfg.f_c, env))


def max_radius_for_altitude(h: float, cfg: RadioConfig, env: EnvironmentParams) -> float:
    """Largest ground range whose ATG loss stays within ``cfg.l_max_db``.

    The returned value is the feasible end of the final bisection bracket, so
    the loss at the returned radius never exceeds the limit.
    """
    _check_altitude(h, cfg)
    loss = lambda r: float(atg_loss_db(h, r, cfg.f_c, env))
    if loss(0.0) > cfg.l_max_db:
        return 0.0
    lo, hi = 0.0, 1000.0
    while loss(hi) <= cfg.l_max_db:
        lo, hi = hi, 2.0 * hi
        if hi > 1e8:
            return lo
    while hi - lo > RADIUS_TOL:
        mid = 0.5 * (lo + hi)
        if loss(mid) <= cfg.l_max_db:
            lo = mid
        else:
            hi = mid
    return lo


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def altitude_for_radius(r: float, cfg: RadioConfig, env: EnvironmentParams) -> float:
    """Altitude in ``[h_min, h_max]`` minimising the path loss at the cell edge ``r``.

    Golden-section search to ``ALTITUDE_TOL``. Raises
    :class:`InfeasibleRadiusError` when even the best altitude leaves the edge
    loss above ``l_max``.
    """
    if r <= 0:
        raise InvalidGeometryError(f"radius must be positive, got {r}")
    f = lambda h: float(atg_loss_db(h, r, cfg.f_c, env))
    a, b = cfg.h_min, cfg.h_max
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > ALTITUDE_TOL:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    # the bracket may have collapsed onto a bound
    candidates = [0.5 * (a + b), cfg.h_min, cfg.h_max]
    h_best = min(candidates, key=f)
    best = f(h_best)
    if best > cfg.l_max_db:
        raise InfeasibleRadiusError(r, best, cfg.l_max_db)
    return h_best


# --------------------------------------------------------------------------
# mmWave backhaul

def backhaul_received_power(d: float, cfg: RadioConfig) -> float:
    """Free-space received power (mW) at a UAV ``d`` metres from the GBS."""
    if d <= 0:
        raise InvalidGeometryError(f"backhaul distance must be positive, got {d}")
    wavelength_term = SPEED_OF_LIGHT / (4.0 * math.pi * d * cfg.f_c_mmwave)
    return cfg.p_g_mmwave * cfg.g_tx * cfg.g_rx * wavelength_term**2


def backhaul_snr(d: float, b_alloc: float, cfg: RadioConfig) -> float:
    return backhaul_received_power(d, cfg) / (b_alloc * cfg.n0)


def backhaul_capacity(
    d: float, b_alloc: float, cfg: RadioConfig, *, enforce_threshold: Optional[bool] = None
) -> float:
    """Shannon capacity (bps) of the GBS->UAV mmWave link.

    With ``enforce_threshold`` (default: ``cfg.enforce_mmwave_threshold``) the
    link reports zero capacity unless its SNR exceeds the mmWave threshold.
    """
    if b_alloc <= 0:
        return 0.0
    snr = backhaul_snr(d, b_alloc, cfg)
    if enforce_threshold is None:
        enforce_threshold = cfg.enforce_mmwave_threshold
    if enforce_threshold and not snr > cfg.sinr_threshold_mmwave:
        return 0.0
    return b_alloc * math.log2(1.0 + snr)


# --------------------------------------------------------------------------
# rates and power

def _success(sinr, threshold):
    return np.where(np.asarray(sinr) > threshold, 1.0, 0.0)


def link_rate(sinr, b_alloc, cfg: RadioConfig):
    """Shannon rate gated by the strict SINR threshold; vectorised."""
    sinr = np.asarray(sinr, dtype=float)
    rate = np.asarray(b_alloc, dtype=float) * _success(sinr, cfg.sinr_threshold) * np.log2(
        1.0 + np.maximum(sinr, 0.0)
    )
    return float(rate) if rate.ndim == 0 else rate


def uav_ue_rate(sinr: float, b_alloc: float, cfg: RadioConfig) -> float:
    if b_alloc <= 0:
        raise ValueError("allocated bandwidth must be positive")
    return link_rate(sinr, b_alloc, cfg)


def gbs_ue_rate(sinr: float, b_alloc: float, cfg: RadioConfig) -> float:
    if b_alloc <= 0:
        raise ValueError("allocated bandwidth must be positive")
    return link_rate(sinr, b_alloc, cfg)


def gbs_outage_success(
    distance: float, interference: float, b_alloc: float, cfg: RadioConfig
) -> float:
    """Pr{SINR > threshold} of the GBS link under exp(1) Rayleigh fading."""
    r = max(distance, MIN_TERRESTRIAL_DISTANCE)
    return math.exp(
        -cfg.sinr_threshold * (interference + b_alloc * cfg.n0) * r**cfg.alpha / cfg.p_g
    )


def required_power(c_target, b_alloc, path_loss_db, interference, cfg: RadioConfig):
    """Transmit power (mW) that delivers ``c_target`` bps over ``b_alloc`` Hz."""
    if np.any(np.asarray(c_target) <= 0):
        raise ValueError("target rate must be positive")
    b_alloc = np.asarray(b_alloc, dtype=float)
    p = (
        10.0 ** (np.asarray(path_loss_db, dtype=float) / 10.0)
        * (np.asarray(interference, dtype=float) + b_alloc * cfg.n0)
        * np.expm1(np.log(2.0) * np.asarray(c_target, dtype=float) / b_alloc)
    )
    return float(p) if p.ndim == 0 else p


def n_g_max(cfg: RadioConfig) -> int:
    """Upper bound on GBS-served UEs, success probability taken as 1."""
    return int(math.floor(cfg.bandwidth * math.log2(1.0 + cfg.sinr_threshold) / cfg.c_min))


def target_sinr(b_alloc, cfg: RadioConfig):
    """SINR each UAV sizes its per-UE power for: the larger of the association
    threshold and the SINR needed for ``c_min``, plus the power margin."""
    b_alloc = np.asarray(b_alloc, dtype=float)
    need = np.expm1(np.log(2.0) * cfg.c_min / b_alloc)
    return np.maximum(cfg.sinr_threshold, need) * cfg.power_margin


def terrestrial_gain(distance, alpha: float):
    """Mean-fading power-law gain r^-alpha with the 1 m clamp."""
    d = np.maximum(np.asarray(distance, dtype=float), MIN_TERRESTRIAL_DISTANCE)
    return d ** (-alpha)


def gbs_ue_sinr(
    ue: Sequence[float],
    gbs: Sequence[float],
    cfg: RadioConfig,
    *,
    b_alloc: Optional[float] = None,
    uav_positions: Sequence[Sequence[float]] = (),
    uav_powers: Sequence[float] = (),
    fading_gain: float = 1.0,
) -> float:
    """SINR at a GBS-served UE.

    UAV interference uses the same power law as the terrestrial link, taken
    over the slant distance to each UAV (``uav_positions`` rows are x, y, h).
    With no UAVs the interference term is zero.
    """
    b = cfg.bandwidth if b_alloc is None else b_alloc
    r = math.hypot(ue[0] - gbs[0], ue[1] - gbs[1])
    signal = cfg.p_g * fading_gain * float(terrestrial_gain(r, cfg.alpha))
    interference = 0.0
    for pos, p in zip(uav_positions, uav_powers):
        d = math.sqrt((ue[0] - pos[0]) ** 2 + (ue[1] - pos[1]) ** 2 + pos[2] ** 2)
        interference += p * fading_gain * float(terrestrial_gain(d, cfg.alpha))
    return signal / (interference + b * cfg.n0)


def ue_link_budget(
    h: float, r: float, power: float, interference: float, b_alloc: float,
    cfg: RadioConfig, env: EnvironmentParams,
) -> LinkBudget:
    loss = atg_path_loss(h, r, cfg, env)
    received = power * 10.0 ** (-loss / 10.0)
    sinr = received / (interference + b_alloc * cfg.n0)
    return LinkBudget(loss, received, sinr, uav_ue_rate(sinr, b_alloc, cfg))


def uav_ue_sinr(
    ue: int, uav_j: int, fleet, assoc, cfg: RadioConfig, env: EnvironmentParams,
    *, ue_positions, gbs_position,
) -> float:
    """Scalar SINR of UE ``ue`` on UAV ``uav_j``; a loop over the fleet.

    ``fleet`` items carry ``location``, ``altitude``, ``radius``; ``assoc``
    carries ``serving`` labels (``j + 1`` for UAV ``j``), per-UE ``power`` and
    ``bandwidth``. Interferers are the GBS at full power and every other UAV
    whose disc contains the UE, the latter scaled to the UE's band share.
    """
    x, y = ue_positions[ue]
    b = float(assoc.bandwidth[ue])
    if b <= 0:
        raise ValueError("UE has no bandwidth allocated")

    def ground(u):
        return math.hypot(x - u.location[0], y - u.location[1])

    own = fleet[uav_j]
    signal = float(assoc.power[ue]) * 10.0 ** (-atg_path_loss(own.altitude, ground(own), cfg, env) / 10.0)
    interference = cfg.p_g * float(
        terrestrial_gain(math.hypot(x - gbs_position[0], y - gbs_position[1]), cfg.alpha)
    )
    for j, u in enumerate(fleet):
        if j == uav_j or ground(u) > u.radius + 1e-9:
            continue
        p_j = min(uav_total_power(j, assoc), cfg.p_uav)
        loss = atg_path_loss(u.altitude, ground(u), cfg, env)
        interference += p_j * 10.0 ** (-loss / 10.0) * b / cfg.bandwidth
    return signal / (interference + b * cfg.n0)


def uav_total_power(uav_j: int, assoc) -> float:
    """Sum of per-UE powers on UAV ``uav_j`` (mW), uncapped."""
    return float(sum(p for s, p in zip(assoc.serving, assoc.power) if s == uav_j + 1))


def uav_total_rate(uav_j: int, assoc) -> float:
    """Sum of per-UE rates on UAV ``uav_j`` (bps)."""
    return float(sum(r for s, r in zip(assoc.serving, assoc.rate) if s == uav_j + 1))
