# coding=utf-8
"""
Secure transmission in a communication slot.

The ABS sends an MRT beam toward the user and splits a fraction alpha of its
power into artificial noise (AN) aimed at the last eavesdropper estimate.
The robust solver picks alpha on a grid so that the secrecy rate against the
worst eavesdropper position inside the uncertainty region is maximal.

All rates are in bits/s/Hz and are evaluated directly from the beamformer,
the AN covariance and the channels.

"""

import logging
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .channel import azimuth, channel, steering_matrix
from .exceptions import DomainError, GeometryError
from .params import ScenarioConfig
from .sar import UncertaintyState
from .scenario import AbsPose

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

# Reference distance of beta_0; candidate ranges never go below it.
MIN_DISTANCE = 1.0

TIE_TOLERANCE = 1e-12

# Upper bound on alpha x theta cells evaluated in one block.
_CHUNK_CELLS = 1 << 20


class TxDesign(NamedTuple):
    w: np.ndarray
    an_dir: np.ndarray
    alpha: float

    def an_covariance(self, p_com_max: float) -> np.ndarray:
        return self.alpha * p_com_max * np.outer(self.an_dir, self.an_dir.conj())


class RobustResult(NamedTuple):
    alpha_star: float
    secrecy_rate: float
    worst_theta: float
    worst_d: float
    worst_point_eve_rate: float
    user_rate: float


def wrap_angle(x):
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - x, 2.0 * np.pi)


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"power split alpha={alpha} outside [0, 1]")


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _directions(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState) -> Tuple[np.ndarray, np.ndarray]:
    """User channel at the current pose and the unit AN direction toward the estimate."""
    h_u = channel(cfg, pose, np.asarray(cfg.q_u, dtype=float)).entries
    h_est = channel(cfg, pose, u.center)
    an_dir = h_est.entries / h_est.norm
    return h_u, an_dir


def tx_design(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, alpha: float) -> TxDesign:
    _check_alpha(alpha)
    h_u, an_dir = _directions(cfg, pose, u)
    w = math.sqrt((1.0 - alpha) * cfg.p_com_max) * _unit(h_u)
    return TxDesign(w=w, an_dir=an_dir, alpha=float(alpha))


def _rate(signal, interference, noise):
    return np.log2(1.0 + signal / (interference + noise))


def user_rate(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, alpha: float) -> float:
    design = tx_design(cfg, pose, u, alpha)
    h_u = channel(cfg, pose, np.asarray(cfg.q_u, dtype=float)).entries
    signal = abs(np.vdot(design.w, h_u)) ** 2
    jamming = alpha * cfg.p_com_max * abs(np.vdot(design.an_dir, h_u)) ** 2
    return float(_rate(signal, jamming, cfg.sigma_u2))


def eve_rate_for_channel(cfg: ScenarioConfig, design: TxDesign, h_e: np.ndarray) -> float:
    """Eavesdropper rate for a given channel vector under a given transmit design."""
    signal = abs(np.vdot(design.w, h_e)) ** 2
    jamming = design.alpha * cfg.p_com_max * abs(np.vdot(design.an_dir, h_e)) ** 2
    return float(_rate(signal, jamming, cfg.sigma_e2))


def eve_rate_at(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, alpha: float,
                q_e: np.ndarray) -> float:
    design = tx_design(cfg, pose, u, alpha)
    return eve_rate_for_channel(cfg, design, channel(cfg, pose, q_e).entries)


def delta_theta(cfg: ScenarioConfig, d_hat: float, r_e: float) -> float:
    """Half-width of the azimuth sector covering the uncertainty region."""
    if d_hat <= r_e:
        return math.pi
    return math.asin(r_e / d_hat)


def _worst_distances(d_hat: float, offsets: np.ndarray, r_e: float) -> np.ndarray:
    sin_off = np.sin(offsets)
    disc = r_e * r_e - d_hat * d_hat * sin_off * sin_off
    if np.any(disc < -1e-9 * max(1.0, d_hat * d_hat)):
        raise GeometryError(f"azimuth outside the uncertainty sector (d_hat={d_hat}, r_e={r_e})")
    root = np.sqrt(np.maximum(disc, 0.0))
    proj = d_hat * np.cos(offsets)
    if d_hat > r_e:
        d = proj - root
    elif d_hat == r_e:
        # One root is exactly zero.
        d = np.zeros_like(proj)
    else:
        d = proj + root
    return np.maximum(d, MIN_DISTANCE)


def worst_distance(cfg: ScenarioConfig, d_hat: float, theta_hat: float, theta: float, r_e: float) -> float:
    """
    Closest range at azimuth theta to a point of the sphere of radius r_e
    around the estimate (law of cosines), floored at MIN_DISTANCE.
    """
    offset = wrap_angle(np.array([theta - theta_hat], dtype=float))
    return float(_worst_distances(d_hat, offset, r_e)[0])


def theta_grid(theta_hat: float, delta: float, eps: float) -> np.ndarray:
    """
    Azimuths theta_hat + k eps for |k eps| <= delta, plus both sector edges.

    With delta = pi the grid covers the full circle once (pi and -pi are
    the same direction). Values are wrapped to (-pi, pi] and ordered by offset.
    """
    if delta <= 0.0:
        return np.array([wrap_angle(theta_hat)], dtype=float)
    full = delta >= math.pi
    delta = min(delta, math.pi)
    k = int(math.floor(delta / eps + 1e-9))
    offsets = eps * np.arange(-k, k + 1, dtype=float)
    if k * eps < delta - TIE_TOLERANCE:
        edges = [delta] if full else [-delta, delta]
        offsets = np.concatenate([offsets, edges])
    elif full:
        offsets = offsets[1:]
    offsets.sort()
    return wrap_angle(theta_hat + offsets)


def alpha_grid(eps: float) -> np.ndarray:
    k = int(math.floor(1.0 / eps + 1e-9))
    grid = eps * np.arange(k + 1, dtype=float)
    if grid[-1] < 1.0 - TIE_TOLERANCE:
        grid = np.append(grid, 1.0)
    return np.minimum(grid, 1.0)


class _SlotGeometry(NamedTuple):
    """Per-slot quantities shared by every alpha of the grid."""
    user_gain: float      # P |h_u|^2
    user_leak: float      # P |an^H h_u|^2
    sig_gain: np.ndarray  # P |h_u_hat^H h_e(theta)|^2
    an_gain: np.ndarray   # P |an^H h_e(theta)|^2


def _slot_geometry(cfg: ScenarioConfig, h_u: np.ndarray, an_dir: np.ndarray,
                   h_e: np.ndarray) -> _SlotGeometry:
    p = cfg.p_com_max
    hu_hat = _unit(h_u)
    return _SlotGeometry(
        user_gain=p * float(np.vdot(h_u, h_u).real),
        user_leak=p * abs(np.vdot(an_dir, h_u)) ** 2,
        sig_gain=p * np.abs(h_e @ hu_hat.conj()) ** 2,
        an_gain=p * np.abs(h_e @ an_dir.conj()) ** 2,
    )


def _user_rates(cfg: ScenarioConfig, geo: _SlotGeometry, alphas: np.ndarray) -> np.ndarray:
    return _rate((1.0 - alphas) * geo.user_gain, alphas * geo.user_leak, cfg.sigma_u2)


def _eve_rates(cfg: ScenarioConfig, geo: _SlotGeometry, alphas: np.ndarray) -> np.ndarray:
    """Eavesdropper rates, shape (len(alphas), number of candidates)."""
    a = alphas[:, None]
    return _rate((1.0 - a) * geo.sig_gain[None, :], a * geo.an_gain[None, :], cfg.sigma_e2)


def _sector_candidates(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, r_e: float,
                       eps_theta: float) -> Tuple[np.ndarray, np.ndarray, _SlotGeometry]:
    """Candidate azimuths, their closest ranges and the shared slot geometry."""
    d_hat = float(np.linalg.norm(pose.q_a - u.center))
    theta_hat = azimuth(cfg, pose, u.center)
    delta = delta_theta(cfg, d_hat, r_e)
    if delta >= math.pi:
        log.debug("slot %d: ABS inside the uncertainty sphere (d_hat=%.2f, r_e=%.2f)", pose.n, d_hat, r_e)

    thetas = theta_grid(theta_hat, delta, eps_theta)
    dists = _worst_distances(d_hat, wrap_angle(thetas - theta_hat), r_e)
    h_e = math.sqrt(cfg.beta_0) / dists[:, None] * steering_matrix(cfg, thetas)
    h_u, an_dir = _directions(cfg, pose, u)
    return thetas, dists, _slot_geometry(cfg, h_u, an_dir, h_e)


def robust_power_allocation(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, r_e: float,
                            eps_alpha: Optional[float] = None,
                            eps_theta: Optional[float] = None) -> RobustResult:
    """
    Grid max-min over the power split alpha and the worst eavesdropper azimuth.

    For each alpha the inner adversary picks the azimuth in the uncertainty
    sector (at its closest range) with the highest eavesdropper rate; the
    outer loop keeps the alpha with the best secrecy rate, breaking ties
    toward less jamming.
    """
    eps_alpha = cfg.eps_alpha if eps_alpha is None else eps_alpha
    eps_theta = cfg.eps_theta if eps_theta is None else eps_theta
    thetas, dists, geo = _sector_candidates(cfg, pose, u, r_e, eps_theta)

    alphas = alpha_grid(eps_alpha)
    r_u = _user_rates(cfg, geo, alphas)
    worst_eve = np.empty_like(alphas)
    worst_idx = np.empty(alphas.shape, dtype=int)
    chunk = max(1, _CHUNK_CELLS // len(thetas))
    for start in range(0, len(alphas), chunk):
        rates = _eve_rates(cfg, geo, alphas[start:start + chunk])
        idx = np.argmax(rates, axis=1)
        worst_idx[start:start + chunk] = idx
        worst_eve[start:start + chunk] = rates[np.arange(len(idx)), idx]

    secrecy = np.maximum(r_u - worst_eve, 0.0)
    best = secrecy.max()
    k = int(np.flatnonzero(secrecy >= best - TIE_TOLERANCE)[0])
    j = worst_idx[k]
    return RobustResult(
        alpha_star=float(alphas[k]),
        secrecy_rate=float(secrecy[k]),
        worst_theta=float(thetas[j]),
        worst_d=float(dists[j]),
        worst_point_eve_rate=float(worst_eve[k]),
        user_rate=float(r_u[k]),
    )


def worst_case_secrecy(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState,
                       r_e: float) -> Tuple[float, float]:
    result = robust_power_allocation(cfg, pose, u, r_e)
    return result.secrecy_rate, result.alpha_star


def secrecy_at_alpha(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, r_e: float,
                     alpha: float, eps_theta: Optional[float] = None) -> float:
    """Worst-case secrecy rate over the azimuth sector with the split fixed at alpha."""
    _check_alpha(alpha)
    eps_theta = cfg.eps_theta if eps_theta is None else eps_theta
    _, _, geo = _sector_candidates(cfg, pose, u, r_e, eps_theta)
    alphas = np.array([alpha], dtype=float)
    r_u = _user_rates(cfg, geo, alphas)[0]
    return float(max(r_u - _eve_rates(cfg, geo, alphas)[0].max(), 0.0))


def disk_sampled_secrecy(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, r_e: float,
                         alpha: float, samples: int = 10_000,
                         rng: Optional[np.random.Generator] = None) -> float:
    """
    Secrecy rate at a fixed alpha against the worst of `samples` points drawn
    uniformly from the true ground disk (cross-check of the sector model).
    """
    _check_alpha(alpha)
    rng = np.random.default_rng() if rng is None else rng
    radius = r_e * np.sqrt(rng.uniform(size=samples))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=samples)
    points = np.column_stack([
        u.center[0] + radius * np.cos(angle),
        u.center[1] + radius * np.sin(angle),
        np.zeros(samples),
    ])
    diffs = points - pose.q_a
    dists = np.linalg.norm(diffs, axis=1)
    thetas = np.arctan2(diffs @ pose.e_t, diffs @ pose.e_perp)
    h_e = math.sqrt(cfg.beta_0) / dists[:, None] * steering_matrix(cfg, thetas)
    h_u, an_dir = _directions(cfg, pose, u)
    geo = _slot_geometry(cfg, h_u, an_dir, h_e)
    alphas = np.array([alpha], dtype=float)
    r_u = _user_rates(cfg, geo, alphas)[0]
    r_e_max = _eve_rates(cfg, geo, alphas)[0].max()
    return float(max(r_u - r_e_max, 0.0))


def disk_sampling_gap(cfg: ScenarioConfig, pose: AbsPose, u: UncertaintyState, r_e: float,
                      samples: int = 10_000, rng: Optional[np.random.Generator] = None) -> float:
    """
    Sector value minus the ground-disk sampled value, both at the solver's alpha.

    Positive when the sector model is optimistic about the true disk.
    """
    result = robust_power_allocation(cfg, pose, u, r_e)
    sampled = disk_sampled_secrecy(cfg, pose, u, r_e, result.alpha_star, samples, rng)
    gap = result.secrecy_rate - sampled
    log.debug("slot %d: disk-sampling gap %.4f (sector %.4f, disk %.4f, r_e=%.2f)",
              pose.n, gap, result.secrecy_rate, sampled, r_e)
    return gap
