"""Exposure model, power-allocation methods and rate evaluators.

``alpha`` is always the direct-link share: ``p_d = alpha * p_total``.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .numerics import db_to_linear

log = logging.getLogger(__name__)

FEASIBILITY_RTOL = 1e-9
METHODS = ("m1", "m2", "m3", "m4", "m5", "unconstrained")


@dataclass(frozen=True)
class LinkBudget:
    p_total: float  # mW
    p_bar: float  # mW
    lambda_m: float
    noise_power: float  # mW over the whole band
    bandwidth_hz: float

    def __post_init__(self):
        for name in ("p_total", "p_bar", "lambda_m", "noise_power", "bandwidth_hz"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive and finite, got {v!r}")

    @classmethod
    def from_units(cls, p_total_dbm, p_bar_mw, lambda_m, bandwidth_hz=100e6,
                   noise_dbm_per_hz=-174.0, noise_figure_db=10.0):
        noise_dbm = noise_dbm_per_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
        return cls(
            p_total=db_to_linear(p_total_dbm),
            p_bar=p_bar_mw,
            lambda_m=lambda_m,
            noise_power=db_to_linear(noise_dbm),
            bandwidth_hz=bandwidth_hz,
        )


@dataclass(frozen=True)
class PowerSplit:
    """Powers on the direct and RIS links.

    ``p_d + p_r == p_total`` except where the exposure ceiling forces part
    of the budget to stay unused (direct-only, or the RIS-leakage variant).
    """
    p_d: float
    p_r: float
    alpha: float
    method: str


@dataclass(frozen=True)
class EffectiveGains:
    g_direct: float
    g_ris: float
    g_niu: float
    noise_power: float
    g_niu_ris: float = 0.0

    def __post_init__(self):
        for name in ("g_direct", "g_ris", "g_niu", "g_niu_ris"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    @property
    def c1(self):
        return self.g_ris / self.noise_power

    @property
    def c2(self):
        return self.g_direct / self.noise_power

    @classmethod
    def from_channels(cls, channels, w_d, w_r, phases, noise_power):
        theta = np.exp(1j * np.asarray(phases))
        cascade = (channels.h_ri * theta) @ channels.h_br
        g_niu_ris = 0.0
        if channels.h_rn is not None:
            g_niu_ris = abs((channels.h_rn * theta) @ (channels.h_br @ w_r)) ** 2
        return cls(
            g_direct=abs(channels.h_d @ w_d) ** 2,
            g_ris=abs(cascade @ w_r) ** 2,
            g_niu=abs(channels.h_n @ w_d) ** 2,
            noise_power=noise_power,
            g_niu_ris=g_niu_ris,
        )


def emfe_received_power(p_tx, g_niu, lambda_m):
    """Exposure at the NIU, ``(4 pi / lambda) p_tx |h_N w_N|^2``."""
    if not lambda_m > 0:
        raise ConfigError(f"wavelength must be positive, got {lambda_m!r}")
    if p_tx < 0 or g_niu < 0:
        raise DomainError("transmit power and NIU gain must be non-negative")
    return 4.0 * math.pi / lambda_m * p_tx * g_niu


def emfe_power_budget(budget, g_niu):
    """Largest direct-link power keeping the NIU exposure at or below ``p_bar``."""
    if g_niu <= 0:
        return budget.p_total
    return min(budget.p_total, budget.p_bar * budget.lambda_m / (4.0 * math.pi * g_niu))


def exposure(split, gains, budget, leakage=False):
    p = emfe_received_power(split.p_d, gains.g_niu, budget.lambda_m)
    if leakage:
        p += emfe_received_power(split.p_r, gains.g_niu_ris, budget.lambda_m)
    return p


def is_feasible(split, gains, budget, leakage=False):
    return exposure(split, gains, budget, leakage) <= budget.p_bar * (1.0 + FEASIBILITY_RTOL)


def _leakage_fill(budget, gains):
    """Direct-first split when the RIS link also exposes the NIU.

    Along ``p_d + p_r = P`` the exposure is linear in ``p_d``; take the
    largest feasible ``p_d``. If no point of the line is feasible, keep the
    less exposing link alone and scale it down to the ceiling.
    """
    P = budget.p_total
    cap = budget.p_bar * budget.lambda_m / (4.0 * math.pi)  # allowed sum of p * g
    g_n, g_nr = gains.g_niu, gains.g_niu_ris
    at_ris_only, at_direct_only = P * g_nr, P * g_n
    if at_direct_only <= cap:
        return P, 0.0
    if at_ris_only <= cap:
        # g_n > g_nr here, otherwise direct-only would have been feasible
        p_d = (cap - at_ris_only) / (g_n - g_nr)
        p_d = min(max(p_d, 0.0), P)
        return p_d, P - p_d
    if g_nr <= g_n:
        return 0.0, cap / g_nr
    return cap / g_n, 0.0


def _split(p_d, p_r, budget, method):
    return PowerSplit(p_d=p_d, p_r=p_r, alpha=p_d / budget.p_total, method=method)


def lemma1_alpha(p_total, c1, c2, alpha_cap):
    """Closed-form direct-link share maximizing the two-codeword rate.

    The unconstrained stationary point is
    ``(P c2 - P c1 + P^2 c1 c2) / (2 P^2 c1 c2)``; the rate is concave in
    alpha, so the constrained optimum is that point clipped to
    ``[0, min(1, alpha_cap)]``.
    """
    if not 0.0 <= alpha_cap <= 1.0:
        raise DomainError(f"alpha_cap must lie in [0, 1], got {alpha_cap!r}")
    if c1 < 0 or c2 < 0:
        raise DomainError("SNR coefficients must be non-negative")
    if c1 == 0:
        log.debug("RIS link vanished (c1 = 0); all admissible power goes direct")
        return alpha_cap
    if c2 == 0:
        return 0.0
    P = p_total
    stationary = (P * c2 - P * c1 + P * P * c1 * c2) / (2.0 * P * P * c1 * c2)
    return min(alpha_cap, min(1.0, max(0.0, stationary)))


def alpha_grid(alpha_cap, step):
    if not step > 0:
        raise ConfigError(f"grid step must be positive, got {step!r}")
    if not alpha_cap >= 0:
        raise ConfigError("empty alpha grid")
    n = int(math.floor(alpha_cap / step + 1e-12))
    grid = np.arange(n + 1) * step
    grid = grid[grid <= alpha_cap]
    if grid[-1] < alpha_cap:
        grid = np.append(grid, alpha_cap)
    return grid


def rate_curve(alphas, p_total, c1, c2, objective="single"):
    """Spectral efficiency (bits/s/Hz) as a function of the direct share."""
    alphas = np.asarray(alphas, dtype=float)
    if objective == "single":
        return np.log2(1.0 + p_total * c1 + alphas * p_total * (c2 - c1))
    if objective == "multi":
        return np.log2(1.0 + alphas * p_total * c2) + np.log2(1.0 + (1.0 - alphas) * p_total * c1)
    raise ConfigError(f"unknown objective {objective!r}; expected 'single' or 'multi'")


def grid_search_alpha(budget, gains, alpha_cap, step=1e-3, objective="single"):
    """Exhaustive search of the direct share on ``{0, step, ...} U {alpha_cap}``."""
    grid = alpha_grid(alpha_cap, step)
    values = rate_curve(grid, budget.p_total, gains.c1, gains.c2, objective)
    return float(grid[int(np.argmax(values))])


def allocate(method, budget, gains, *, step=1e-3, leakage=False):
    """Split ``budget.p_total`` between the direct and RIS links.

    ``leakage`` makes the RIS-to-NIU exposure count against the ceiling.
    """
    P = budget.p_total
    p_n_tx = emfe_power_budget(budget, gains.g_niu)
    cap = p_n_tx / P
    if method == "m1":
        p_r = P
        if leakage and gains.g_niu_ris > 0:
            p_r = min(P, budget.p_bar * budget.lambda_m / (4.0 * math.pi * gains.g_niu_ris))
        return _split(0.0, p_r, budget, method)
    if method == "m2":
        return _split(p_n_tx, 0.0, budget, method)
    if method == "m3":
        if leakage:
            return _split(*_leakage_fill(budget, gains), budget, method)
        return _split(p_n_tx, P - p_n_tx, budget, method)
    if method in ("m4", "m5"):
        if method == "m4":
            alpha = grid_search_alpha(budget, gains, cap, step=step, objective="single")
        else:
            alpha = lemma1_alpha(P, gains.c1, gains.c2, cap)
        # a binding cap reproduces Method 3's split exactly, not up to rounding
        p_d = p_n_tx if alpha == cap else alpha * P
        return PowerSplit(p_d=p_d, p_r=P - p_d, alpha=alpha, method=method)
    if method == "unconstrained":
        return _split(P, 0.0, budget, method)
    raise ConfigError(f"unknown allocation method {method!r}; expected one of {METHODS}")


def rate_single_codeword(split, gains, budget):
    snr = (split.p_d * gains.g_direct + split.p_r * gains.g_ris) / budget.noise_power
    return budget.bandwidth_hz * math.log2(1.0 + snr)


def rate_multi_codeword(split, gains, budget):
    snr_d = split.p_d * gains.g_direct / budget.noise_power
    snr_r = split.p_r * gains.g_ris / budget.noise_power
    return budget.bandwidth_hz * (math.log2(1.0 + snr_d) + math.log2(1.0 + snr_r))


def rate8_derivative_alpha(alpha, p_total, c1, c2, bandwidth_hz=1.0):
    """d/d(alpha) of ``B [log2(1 + alpha P c2) + log2(1 + (1 - alpha) P c1)]``."""
    direct = 1.0 + alpha * p_total * c2
    reflected = 1.0 + (1.0 - alpha) * p_total * c1
    if direct <= 0 or reflected <= 0:
        raise DomainError(f"alpha={alpha!r} leaves the domain of the logarithms")
    return bandwidth_hz / math.log(2.0) * (c2 * p_total / direct - c1 * p_total / reflected)
