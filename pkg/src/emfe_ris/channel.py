"""Link generation: mmMAGIC path loss, shadowing, Rayleigh / multipath fading."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, GeometryError
from .numerics import as_row

SPEED_OF_LIGHT = 299_792_458.0

CHANNEL_KINDS = ("rayleigh", "multipath", "los")
AOD_POLICIES = ("uniform", "fixed")

# Broadside (boresight) directions of the two arrays in the 2-D plane. The BS
# faces along +x towards the users; the RIS hangs above the x-axis facing down.
BS_BROADSIDE = (1.0, 0.0)
RIS_BROADSIDE = (0.0, -1.0)


@dataclass(frozen=True)
class Geometry:
    bs_pos: tuple
    ris_pos: tuple
    iu_pos: tuple
    niu_pos: tuple
    gain_bs_dbi: float = 18.0
    gain_ris_dbi: float = 18.0
    gain_ue_dbi: float = 0.0
    n_t: int = 32
    n: int = 100

    def __post_init__(self):
        if self.n_t < 1 or self.n < 1:
            raise GeometryError(f"need n_t >= 1 and n >= 1, got {self.n_t}, {self.n}")
        for a, b in (("bs", "iu"), ("bs", "ris"), ("ris", "iu"), ("bs", "niu")):
            if self.distance(a, b) <= 0.0:
                raise GeometryError(f"{a} and {b} coincide")

    def position(self, node):
        return np.asarray(getattr(self, f"{node}_pos"), dtype=float)

    def distance(self, a, b):
        return float(np.linalg.norm(self.position(b) - self.position(a)))


@dataclass(frozen=True)
class ChannelModelConfig:
    kind: str = "rayleigh"
    fc_ghz: float = 28.0
    shadowing_sigma_db: float = 2.0
    n_paths: int = 3
    aod_policy: str = "uniform"
    # Non-dominant path angles relative to LoS, used when aod_policy == "fixed".
    fixed_aods: tuple = ()
    # False draws one shadowing sample shared by both RIS segments.
    independent_ris_shadowing: bool = True

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ConfigError(f"unknown channel model {self.kind!r}; expected one of {CHANNEL_KINDS}")
        if not self.fc_ghz > 0:
            raise ConfigError("fc_ghz must be positive")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        if not self.shadowing_sigma_db >= 0:
            raise ConfigError("shadowing_sigma_db must be non-negative")
        if self.aod_policy not in AOD_POLICIES:
            raise ConfigError(f"unknown AoD policy {self.aod_policy!r}")
        if self.aod_policy == "fixed" and len(self.fixed_aods) != self.n_paths - 1:
            raise ConfigError("fixed_aods must list n_paths - 1 angles")

    @property
    def wavelength_m(self):
        return SPEED_OF_LIGHT / (self.fc_ghz * 1e9)


@dataclass(frozen=True)
class ChannelSet:
    h_d: np.ndarray
    h_br: np.ndarray
    h_ri: np.ndarray
    h_n: np.ndarray
    h_rn: np.ndarray = field(default=None)

    @property
    def n_t(self):
        return self.h_d.shape[0]

    @property
    def n(self):
        return self.h_ri.shape[0]


def path_loss_db(d, fc_ghz):
    """mmMAGIC LoS path loss in dB; ``d`` in meters, ``fc_ghz`` in GHz."""
    if not d > 0:
        raise GeometryError(f"path loss needs a positive distance, got {d!r}")
    if not fc_ghz > 0:
        raise DomainError(f"carrier frequency must be positive, got {fc_ghz!r}")
    return 19.2 * math.log10(d) + 32.9 + 20.8 * math.log10(fc_ghz)


def link_gain_linear(d, fc_ghz, tx_gain_dbi, rx_gain_dbi, shadowing_db=0.0):
    pl = path_loss_db(d, fc_ghz)
    return 10.0 ** ((tx_gain_dbi + rx_gain_dbi - pl - shadowing_db) / 10.0)


def steering_vector(n_t, psi, spacing_fraction=0.5):
    """ULA response ``exp(j 2 pi d m sin(psi))``, m = 0..n_t-1, spacing in wavelengths."""
    if n_t < 1:
        raise DomainError("steering vector needs at least one element")
    m = np.arange(n_t)
    return np.exp(1j * 2 * np.pi * spacing_fraction * m * np.sin(psi))


def ris_steering_vector(n, psi, spacing_fraction=0.5):
    """RIS panel response for an in-plane angle.

    A square panel (n a perfect square) is a sqrt(n) x sqrt(n) UPA whose
    second axis is orthogonal to the simulation plane, so only the first
    axis carries phase. Otherwise the panel is treated as a ULA.
    """
    side = math.isqrt(n)
    if side * side == n:
        return np.kron(steering_vector(side, psi, spacing_fraction), np.ones(side))
    return steering_vector(n, psi, spacing_fraction)


def sample_rayleigh(rows, cols, gain_linear, rng):
    if gain_linear < 0:
        raise DomainError("link gain must be non-negative")
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return math.sqrt(gain_linear / 2.0) * z


def standard_cn(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def sample_multipath(n_t, config, gain_linear, aods, rng, betas=None):
    """``sqrt(g / L) * sum_l beta_l a(psi_l)`` with beta_l ~ CN(0, 1)."""
    aods = np.atleast_1d(np.asarray(aods, dtype=float))
    if aods.size == 0:
        raise ConfigError("multipath channel needs at least one AoD")
    if aods.size != config.n_paths:
        raise ConfigError(f"got {aods.size} AoDs for {config.n_paths} paths")
    if betas is None:
        betas = standard_cn(rng, aods.size)
    betas = np.asarray(betas, dtype=complex)
    h = sum(b * steering_vector(n_t, psi) for b, psi in zip(betas, aods))
    return math.sqrt(gain_linear / aods.size) * h


def sample_multipath_matrix(n_rx, n_tx, config, gain_linear, aoas, aods, rng):
    """BS-to-RIS multipath: sum of rank-one ``a_ris(aoa)^T a_bs(aod)`` terms."""
    betas = standard_cn(rng, len(aods))
    h = np.zeros((n_rx, n_tx), dtype=complex)
    for b, theta, psi in zip(betas, aoas, aods):
        h += b * np.outer(ris_steering_vector(n_rx, theta), steering_vector(n_tx, psi))
    return math.sqrt(gain_linear / len(aods)) * h


def composite_channel(h_d, h_br, h_ri, phases):
    """``h_d + h_ri diag(exp(j phases)) h_br``."""
    h_d = as_row(h_d)
    h_ri = as_row(h_ri)
    h_br = np.asarray(h_br, dtype=complex)
    phases = np.asarray(phases, dtype=float)
    if h_br.ndim != 2 or h_br.shape != (h_ri.size, h_d.size) or phases.shape != (h_ri.size,):
        raise DomainError(
            f"non-conformable composite channel: h_d {h_d.shape}, h_br {h_br.shape}, "
            f"h_ri {h_ri.shape}, phases {phases.shape}"
        )
    return h_d + (h_ri * np.exp(1j * phases)) @ h_br


def ris_channel(h_br, h_ri, phases):
    """Reflected part only: ``h_ri diag(exp(j phases)) h_br``."""
    return (as_row(h_ri) * np.exp(1j * np.asarray(phases, dtype=float))) @ np.asarray(h_br)


def signed_angle(origin, target, broadside):
    """Angle of ``target`` seen from ``origin``, measured from the array broadside."""
    v = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
    b = np.asarray(broadside, dtype=float)
    cross = b[0] * v[1] - b[1] * v[0]
    return math.atan2(cross, float(b @ v))


def _path_angles(los, config, rng):
    """Dominant path at the LoS angle; the rest fixed offsets or uniform in [-pi/2, pi/2]."""
    if config.n_paths == 1:
        return np.array([los])
    if config.aod_policy == "fixed":
        extra = los + np.asarray(config.fixed_aods, dtype=float)
    else:
        extra = rng.uniform(-np.pi / 2, np.pi / 2, config.n_paths - 1)
    return np.concatenate(([los], extra))


def build_channel_set(geometry, config, rng, *, leakage=False):
    """Draw one fading realization of all links.

    Shadowing is drawn first for every link in a fixed order, then fading,
    so a given RNG state produces the same standardized draws whatever the
    geometry. This keeps sweeps over NIU position or power on common random
    numbers. The RIS-to-NIU link is drawn last so enabling it does not
    perturb the other links.
    """
    g = geometry
    fc = config.fc_ghz
    sigma = config.shadowing_sigma_db

    shadow = rng.normal(0.0, 1.0, 4) * sigma
    if not config.independent_ris_shadowing:
        shadow[2] = shadow[1]
    gain_d = link_gain_linear(g.distance("bs", "iu"), fc, g.gain_bs_dbi, g.gain_ue_dbi, shadow[0])
    gain_br = link_gain_linear(g.distance("bs", "ris"), fc, g.gain_bs_dbi, g.gain_ris_dbi, shadow[1])
    gain_ri = link_gain_linear(g.distance("ris", "iu"), fc, g.gain_ris_dbi, g.gain_ue_dbi, shadow[2])
    gain_n = link_gain_linear(g.distance("bs", "niu"), fc, g.gain_bs_dbi, g.gain_ue_dbi, shadow[3])

    bs, ris, iu, niu = (g.position(k) for k in ("bs", "ris", "iu", "niu"))

    if config.kind == "rayleigh":
        h_d = sample_rayleigh(1, g.n_t, gain_d, rng)[0]
        h_br = sample_rayleigh(g.n, g.n_t, gain_br, rng)
        h_ri = sample_rayleigh(1, g.n, gain_ri, rng)[0]
        h_n = sample_rayleigh(1, g.n_t, gain_n, rng)[0]
    elif config.kind == "multipath":
        iu_los = signed_angle(bs, iu, BS_BROADSIDE)
        niu_offset = signed_angle(bs, niu, BS_BROADSIDE) - iu_los
        iu_aods = _path_angles(iu_los, config, rng)
        h_d = sample_multipath(g.n_t, config, gain_d, iu_aods, rng)
        # The NIU sees the IU's scatterers rotated by its angular offset.
        h_n = sample_multipath(g.n_t, config, gain_n, iu_aods + niu_offset, rng)
        br_aods = _path_angles(signed_angle(bs, ris, BS_BROADSIDE), config, rng)
        br_aoas = _path_angles(signed_angle(ris, bs, RIS_BROADSIDE), config, rng)
        h_br = sample_multipath_matrix(g.n, g.n_t, config, gain_br, br_aoas, br_aods, rng)
        ri_aods = _path_angles(signed_angle(ris, iu, RIS_BROADSIDE), config, rng)
        h_ri = math.sqrt(gain_ri / config.n_paths) * sum(
            b * ris_steering_vector(g.n, psi)
            for b, psi in zip(standard_cn(rng, config.n_paths), ri_aods)
        )
    else:
        h_d = math.sqrt(gain_d) * steering_vector(g.n_t, signed_angle(bs, iu, BS_BROADSIDE))
        h_n = math.sqrt(gain_n) * steering_vector(g.n_t, signed_angle(bs, niu, BS_BROADSIDE))
        h_br = math.sqrt(gain_br) * np.outer(
            ris_steering_vector(g.n, signed_angle(ris, bs, RIS_BROADSIDE)),
            steering_vector(g.n_t, signed_angle(bs, ris, BS_BROADSIDE)),
        )
        h_ri = math.sqrt(gain_ri) * ris_steering_vector(g.n, signed_angle(ris, iu, RIS_BROADSIDE))

    h_rn = None
    if leakage:
        d_rn = g.distance("ris", "niu")
        s_rn = rng.normal(0.0, sigma)
        gain_rn = link_gain_linear(d_rn, fc, g.gain_ris_dbi, g.gain_ue_dbi, s_rn)
        if config.kind == "rayleigh":
            h_rn = sample_rayleigh(1, g.n, gain_rn, rng)[0]
        elif config.kind == "multipath":
            rn_aods = _path_angles(signed_angle(ris, niu, RIS_BROADSIDE), config, rng)
            h_rn = math.sqrt(gain_rn / config.n_paths) * sum(
                b * ris_steering_vector(g.n, psi)
                for b, psi in zip(standard_cn(rng, config.n_paths), rn_aods)
            )
        else:
            h_rn = math.sqrt(gain_rn) * ris_steering_vector(g.n, signed_angle(ris, niu, RIS_BROADSIDE))

    return ChannelSet(
        h_d=np.asarray(h_d, dtype=complex),
        h_br=np.asarray(h_br, dtype=complex),
        h_ri=np.asarray(h_ri, dtype=complex),
        h_n=np.asarray(h_n, dtype=complex),
        h_rn=None if h_rn is None else np.asarray(h_rn, dtype=complex),
    )
