"""Case 1 / Case 2 scenarios and the Monte Carlo sweep driver."""
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import beamforming as bf
from .channel import ChannelModelConfig, Geometry, build_channel_set
from .emfe_power import (
    EffectiveGains,
    LinkBudget,
    allocate,
    emfe_power_budget,
    is_feasible,
    rate_multi_codeword,
    rate_single_codeword,
)
from .errors import ConfigError, ConvergenceError, DegenerateChannelError, GeometryError

log = logging.getLogger(__name__)

BS_POS = (-80.0, 0.0)
CASE1_IU = (80.0, 0.0)
CASE1_RIS = (0.0, 50.0)
CASE2_IU = (-70.0, 0.0)
CASE2_RIS_CLOSE = (-70.0, 10.0)
CASE2_RIS_FAR = (-30.0, 10.0)

ALLOCATIONS = ("m1", "m2", "m3", "m4", "m5")
BEAMS = ("ao", "dft", "random")
ALIASES = {"random-phase": "m3-random", "no-constraint": "unconstrained"}
# Methods whose rate is computed from ensemble statistics after all trials.
ANALYTIC = ("m5-analytic",)


@dataclass(frozen=True)
class MethodSpec:
    name: str
    allocation: str
    beam: str = "ao"
    leakage: bool = False

    @property
    def objective(self):
        return "multi" if self.allocation == "m5" else "single"

    @property
    def constrained(self):
        return self.allocation != "unconstrained"


def parse_method(name):
    """``<m1..m5>[-<ao|dft|random>][-risleak]``, plus ``no-constraint``,
    ``random-phase`` (Method 3 on random RIS phases) and ``m5-analytic``."""
    if name in ANALYTIC:
        return MethodSpec(name, "m5", "ao")
    base = ALIASES.get(name, name)
    if base == "unconstrained":
        return MethodSpec(name, "unconstrained", "ao")
    parts = base.split("-")
    leakage = parts[-1] == "risleak"
    if leakage:
        parts = parts[:-1]
    if not parts or parts[0] not in ALLOCATIONS or len(parts) > 2:
        raise ConfigError(f"unknown method {name!r}")
    beam = parts[1] if len(parts) == 2 else "ao"
    if beam not in BEAMS:
        raise ConfigError(f"unknown beam scheme {beam!r} in method {name!r}")
    return MethodSpec(name, parts[0], beam, leakage)


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario. ``sweep`` holds NIU x-positions (m) for
    Case 1 and total transmit powers (dBm) for Case 2."""
    case: str = "case1"
    sweep: tuple = tuple(float(x) for x in range(-75, 80, 5))
    methods: tuple = ("m1", "m2", "m3-ao", "m3-dft", "m3-dft-risleak", "m4-ao", "m5",
                      "m5-analytic", "no-constraint", "random-phase")
    p_total_dbm: float = 43.0
    p_bar_mw: float = 0.005
    n_t: int = 32
    n_ris: int = 100
    fc_ghz: float = 28.0
    bandwidth_hz: float = 100e6
    noise_dbm_per_hz: float = -174.0
    noise_figure_db: float = 10.0
    gain_bs_dbi: float = 18.0
    gain_ris_dbi: float = 18.0
    gain_ue_dbi: float = 0.0
    channel_model: str = "rayleigh"
    shadowing_sigma_db: float = 2.0
    independent_ris_shadowing: bool = True
    n_paths: int = 3
    ris_pos: tuple = CASE1_RIS
    aod_offset_rad: float = math.pi / 16
    trials: int = 200
    seed: int = 0
    alpha_step: float = 1e-3
    ao_max_iters: int = 100
    ao_rel_tol: float = 1e-8

    def __post_init__(self):
        if self.case not in ("case1", "case2"):
            raise ConfigError(f"unknown case {self.case!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.sweep:
            raise ConfigError("sweep grid is empty")
        if not self.methods:
            raise ConfigError("no methods requested")
        if not self.p_bar_mw > 0:
            raise ConfigError("p_bar_mw must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        for m in self.methods:
            parse_method(m)
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("duplicate methods")

    @property
    def method_specs(self):
        return tuple(parse_method(m) for m in self.methods)

    @property
    def channel_config(self):
        return ChannelModelConfig(
            kind=self.channel_model,
            fc_ghz=self.fc_ghz,
            shadowing_sigma_db=self.shadowing_sigma_db,
            n_paths=self.n_paths,
            independent_ris_shadowing=self.independent_ris_shadowing,
        )

    def geometry(self, value):
        kw = dict(n_t=self.n_t, n=self.n_ris, gain_bs_dbi=self.gain_bs_dbi,
                  gain_ris_dbi=self.gain_ris_dbi, gain_ue_dbi=self.gain_ue_dbi)
        if self.case == "case1":
            return build_case1_geometry(value, ris_pos=self.ris_pos, **kw)
        return build_case2_geometry(self.aod_offset_rad, self.ris_pos, **kw)

    def budget(self, value):
        p_dbm = self.p_total_dbm if self.case == "case1" else value
        return LinkBudget.from_units(
            p_dbm, self.p_bar_mw, self.channel_config.wavelength_m, self.bandwidth_hz,
            self.noise_dbm_per_hz, self.noise_figure_db,
        )

    def digest(self):
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def build_case1_geometry(niu_x, ris_pos=CASE1_RIS, **kw):
    """BS at (-80, 0), IU at (80, 0); the NIU walks the x-axis between them."""
    if not -80.0 < niu_x < 80.0:
        raise GeometryError(f"Case 1 NIU must lie strictly between BS and IU, got x={niu_x}")
    return Geometry(bs_pos=BS_POS, ris_pos=tuple(ris_pos), iu_pos=CASE1_IU,
                    niu_pos=(float(niu_x), 0.0), **kw)


def build_case2_geometry(aod_offset, ris_pos=CASE2_RIS_CLOSE, **kw):
    """IU 10 m from the BS; NIU at the same range, rotated by ``aod_offset`` about the BS."""
    r = math.dist(BS_POS, CASE2_IU)
    niu = (BS_POS[0] + r * math.cos(aod_offset), BS_POS[1] + r * math.sin(aod_offset))
    if aod_offset == 0:
        log.warning("zero AoD offset: NIU coincides with the IU")
    return Geometry(bs_pos=BS_POS, ris_pos=tuple(ris_pos), iu_pos=CASE2_IU, niu_pos=niu, **kw)


@dataclass
class TrialResult:
    rates: dict  # method name -> bits/s
    violations: dict  # method name -> bool
    gains: dict = field(default_factory=dict)  # beam scheme -> EffectiveGains
    p_n_tx: float = math.nan
    # direct-link power that would exactly meet the ceiling, ignoring p_total
    exposure_cap: float = math.nan


def compute_beams(channels, schemes, config, phase_rng, codebook=None):
    out = {}
    if "ao" in schemes:
        out["ao"] = bf.ao_optimize(channels.h_br, channels.h_ri, max_iters=config.ao_max_iters,
                                   rel_tol=config.ao_rel_tol, h_d=channels.h_d)
    if "dft" in schemes:
        out["dft"] = bf.dft_beams(channels.h_br, channels.h_ri,
                                  codebook or bf.dft_codebook(channels.n), h_d=channels.h_d)
    if "random" in schemes:
        out["random"] = bf.random_beams(channels.h_br, channels.h_ri, phase_rng, h_d=channels.h_d)
    return out


def evaluate_methods(specs, beams, channels, budget, alpha_step=1e-3):
    """Allocate power and compute the IU rate for each method on fixed beams."""
    res = TrialResult(rates={}, violations={})
    for scheme, sol in beams.items():
        res.gains[scheme] = EffectiveGains.from_channels(
            channels, sol.w_d, sol.w_r, sol.phases, budget.noise_power)
    for spec in specs:
        if spec.name in ANALYTIC:
            continue
        gains = res.gains[spec.beam]
        split = allocate(spec.allocation, budget, gains, step=alpha_step, leakage=spec.leakage)
        rate = rate_multi_codeword if spec.objective == "multi" else rate_single_codeword
        res.rates[spec.name] = rate(split, gains, budget)
        res.violations[spec.name] = not is_feasible(split, gains, budget, leakage=spec.leakage)
    any_gains = next(iter(res.gains.values()), None)
    if any_gains is not None:
        res.p_n_tx = emfe_power_budget(budget, any_gains.g_niu)
        g = any_gains.g_niu
        res.exposure_cap = budget.p_bar * budget.lambda_m / (4 * math.pi * g) if g > 0 else math.inf
    return res


def run_trial(geometry, config, budget, rng, *, phase_rng=None, codebook=None, beam_cache=None):
    """One fading draw through the whole pipeline.

    Returns ``None`` when the draw is degenerate (zero channel, stalled
    eigen-solver) so the sweep can skip it. ``beam_cache`` (a dict) lets
    sweep points that share the IU-side channels reuse the optimized beams;
    beams are a deterministic function of those channels and the phase RNG
    seed, so reuse does not change results.
    """
    specs = config.method_specs
    schemes = {s.beam for s in specs} | {"ao"}
    leakage = any(s.leakage for s in specs)
    phase_rng = phase_rng if phase_rng is not None else rng
    try:
        channels = build_channel_set(geometry, config.channel_config, rng, leakage=leakage)
        key = None
        if beam_cache is not None:
            key = (channels.h_d.tobytes(), channels.h_br.tobytes(), channels.h_ri.tobytes())
        beams = beam_cache.get(key) if key is not None else None
        if beams is None:
            beams = compute_beams(channels, schemes, config, phase_rng, codebook)
            if key is not None:
                beam_cache[key] = beams
        return evaluate_methods(specs, beams, channels, budget, config.alpha_step)
    except (DegenerateChannelError, ConvergenceError) as exc:
        log.info("invalid trial: %s", exc)
        return None


def trial_rngs(seed, trial):
    """Independent (channel, phase) generators for one trial index.

    Keyed only by the master seed and the trial index, so every sweep point
    reuses the same underlying draws (common random numbers) and results do
    not depend on how trials are scheduled.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    chan, phase = ss.spawn(2)
    return np.random.default_rng(chan), np.random.default_rng(phase)


@dataclass
class SweepResult:
    sweep_values: np.ndarray
    methods: tuple
    mean: np.ndarray  # points x methods, bits/s
    stderr: np.ndarray
    violations: np.ndarray  # points x methods, int
    valid: np.ndarray  # points, number of valid trials
    mean_p_n_tx: np.ndarray  # points, mW, clipped at p_total
    cap_p90: np.ndarray = None  # points, mW: 90th percentile of the unclipped exposure cap
    seed: int = 0
    config_hash: str = ""

    def column(self, method):
        return self.mean[:, self.methods.index(method)]

    def column_stderr(self, method):
        return self.stderr[:, self.methods.index(method)]

    def column_violations(self, method):
        return self.violations[:, self.methods.index(method)]


def _trial_block(args):
    """All sweep points for one trial index; the unit of parallel work."""
    config, trial = args
    codebook = None
    if any(s.beam == "dft" for s in config.method_specs):
        codebook = bf.dft_codebook(config.n_ris)
    names = [m for m in config.methods if m not in ANALYTIC]
    npts = len(config.sweep)
    rates = np.full((npts, len(names)), np.nan)
    viol = np.zeros((npts, len(names)), dtype=bool)
    # columns: g_direct, g_ris (AO), p_n_tx, p_total, exposure_cap
    stats = np.full((npts, 5), np.nan)
    cache = {}
    for i, value in enumerate(config.sweep):
        chan_rng, phase_rng = trial_rngs(config.seed, trial)
        res = run_trial(config.geometry(value), config, config.budget(value), chan_rng,
                        phase_rng=phase_rng, codebook=codebook, beam_cache=cache)
        if res is None:
            continue
        rates[i] = [res.rates[m] for m in names]
        viol[i] = [res.violations[m] for m in names]
        ao = res.gains["ao"]
        stats[i] = (ao.g_direct, ao.g_ris, res.p_n_tx, config.budget(value).p_total, res.exposure_cap)
    return rates, viol, stats


def analytic_upper_bound(budget, g_direct_mean, g_ris_mean, alpha_cap):
    """Two-codeword rate with the closed-form split on ensemble-average SNRs."""
    from .emfe_power import lemma1_alpha

    c1 = g_ris_mean / budget.noise_power
    c2 = g_direct_mean / budget.noise_power
    alpha = lemma1_alpha(budget.p_total, c1, c2, alpha_cap)
    P = budget.p_total
    return budget.bandwidth_hz * (math.log2(1 + alpha * P * c2) + math.log2(1 + (1 - alpha) * P * c1))


def resolve_threads(threads):
    if threads in (None, "auto", 0):
        return os.cpu_count() or 1
    return max(1, int(threads))


def run_sweep(config, threads=1):
    """Average every method over ``config.trials`` fading draws at each sweep point.

    Trials are reduced in index order, so any ``threads`` value produces
    bit-identical output.
    """
    threads = resolve_threads(threads)
    jobs = [(config, t) for t in range(config.trials)]
    if threads == 1 or config.trials == 1:
        blocks = list(map(_trial_block, jobs))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, config.trials // (4 * threads))
            blocks = list(pool.map(_trial_block, jobs, chunksize=chunk))

    rates = np.stack([b[0] for b in blocks])  # trials x points x methods
    viol = np.stack([b[1] for b in blocks])
    stats = np.stack([b[2] for b in blocks])
    ok = ~np.isnan(rates[:, :, 0]) if rates.shape[2] else ~np.isnan(stats[:, :, 0])
    valid = ok.sum(axis=0)

    names = [m for m in config.methods if m not in ANALYTIC]
    npts = len(config.sweep)
    mean = np.full((npts, len(config.methods)), np.nan)
    stderr = np.full_like(mean, np.nan)
    violations = np.zeros((npts, len(config.methods)), dtype=int)
    mean_cap = np.full(npts, np.nan)
    cap_p90 = np.full(npts, np.nan)
    for i, value in enumerate(config.sweep):
        sel = ok[:, i]
        n = int(sel.sum())
        if n == 0:
            log.warning("sweep point %s: every trial was degenerate", value)
            continue
        mean_cap[i] = float(np.mean(stats[sel, i, 2]))
        cap_p90[i] = float(np.quantile(stats[sel, i, 4], 0.9))
        for j, m in enumerate(config.methods):
            if m in ANALYTIC:
                budget = config.budget(value)
                cap = float(np.mean(np.minimum(stats[sel, i, 2] / stats[sel, i, 3], 1.0)))
                mean[i, j] = analytic_upper_bound(
                    budget, float(np.mean(stats[sel, i, 0])), float(np.mean(stats[sel, i, 1])), cap)
                stderr[i, j] = 0.0
                continue
            k = names.index(m)
            x = rates[sel, i, k]
            mean[i, j] = float(np.mean(x))
            stderr[i, j] = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
            violations[i, j] = int(viol[sel, i, k].sum())

    return SweepResult(
        sweep_values=np.asarray(config.sweep, dtype=float),
        methods=tuple(config.methods),
        mean=mean,
        stderr=stderr,
        violations=violations,
        valid=valid,
        mean_p_n_tx=mean_cap,
        cap_p90=cap_p90,
        seed=config.seed,
        config_hash=config.digest(),
    )
