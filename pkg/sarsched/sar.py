# coding=utf-8
"""
SAR resolution, signal-to-clutter ratio and the eavesdropper uncertainty disk.

The sensing sub-frame is abstracted: a completed aperture of L slots yields
the eavesdropper position up to the resolution cell delta_r x delta_a(L) and
its velocity. Everything here is a pure function of the scenario constants.

"""

import math
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError
from .params import ScenarioConfig, linear_to_db


class SarDerived(NamedTuple):
    eta: float
    delta_r: float
    scr_slope: float


class UncertaintyState(NamedTuple):
    """
    Last eavesdropper estimate: sensing slot l, aperture length L behind it,
    estimated position (ground) and velocity.
    """
    l: int
    L: int
    center: np.ndarray
    v_est: np.ndarray


def sar_derived(cfg: ScenarioConfig) -> SarDerived:
    return SarDerived(eta=cfg.eta, delta_r=cfg.delta_r, scr_slope=cfg.scr_slope)


def _check_aperture(L: float) -> None:
    if L < 1:
        raise DomainError(f"aperture length must be at least one slot, got {L}")


def azimuth_resolution(cfg: ScenarioConfig, L: float) -> float:
    """delta_a(L) = lambda_r r_a / (2 v_a L delta_t), in metres."""
    _check_aperture(L)
    return cfg.lambda_r * cfg.r_a / (2.0 * cfg.v_a * L * cfg.delta_t)


def scr(cfg: ScenarioConfig, L: float) -> float:
    """Linear SCR after an aperture of L slots; grows linearly with L."""
    _check_aperture(L)
    return cfg.scr_slope * L


def scr_from_resolution(cfg: ScenarioConfig, L: float) -> float:
    """Same quantity as scr(), through sigma_t / (sigma_0 delta_r delta_a)."""
    return cfg.sigma_t / (cfg.sigma_0 * cfg.delta_r * azimuth_resolution(cfg, L))


def scr_db(cfg: ScenarioConfig, L: float) -> float:
    return linear_to_db(scr(cfg, L))


def velocity_upper_bound(cfg: ScenarioConfig, u: UncertaintyState, n: int) -> float:
    """
    Speed bound at slot n given the estimate taken at slot u.l.

    "cap" mode: min(|v_est| + (n - l) a_e_max delta_t, v_e_max).
    "max" mode keeps the max(., .) form, which always returns at least v_e_max.
    """
    if n < u.l:
        raise DomainError(f"slot {n} precedes the estimate slot {u.l}")
    grown = float(np.linalg.norm(u.v_est)) + (n - u.l) * cfg.a_e_max * cfg.delta_t
    if cfg.velocity_bound_mode == "max":
        return max(grown, cfg.v_e_max)
    return min(grown, cfg.v_e_max)


def uncertainty_radius(cfg: ScenarioConfig, u: UncertaintyState, n: int) -> float:
    """
    Radius of the uncertainty disk in slot n.

    Half the resolution-cell diagonal of the (possibly partial) aperture, plus
    the distance the eavesdropper can have covered since the estimate.
    """
    partial = u.L - max(u.l - n, 0)
    if partial < 1:
        raise DomainError(f"slot {n} lies before the aperture that produced the estimate")
    cell = 0.5 * math.hypot(cfg.delta_r, azimuth_resolution(cfg, partial))
    elapsed = max(n - u.l, 0)
    if elapsed == 0:
        return cell
    return cell + elapsed * velocity_upper_bound(cfg, u, n) * cfg.delta_t


def in_region(u: UncertaintyState, r_e: float, q: np.ndarray) -> bool:
    """Closed ground disk of radius r_e around the estimate."""
    q = np.asarray(q, dtype=float)
    return bool(q[2] == 0.0 and np.linalg.norm(q - u.center) <= r_e)
