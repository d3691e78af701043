"""BS precoders and RIS phase configurations.

Three ways to set the RIS: alternating optimization with full CSI, a
Kronecker DFT codebook scan that only needs the received power per beam,
and uniformly random phases as a baseline.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateChannelError, DomainError
from .numerics import as_row, dominant_right_eigvec, mrt

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BeamSolution:
    w_d: np.ndarray
    w_r: np.ndarray
    phases: np.ndarray
    method: str
    iterations: int = 0
    trace: tuple = field(default=())
    codebook_index: int = -1

    @property
    def theta(self):
        return np.exp(1j * self.phases)


@dataclass(frozen=True)
class Codebook:
    n: int
    columns: np.ndarray  # n x n, column i is beam v_i

    def __len__(self):
        return self.columns.shape[1]


def wrap_phases(phases):
    return np.mod(phases, TWO_PI)


def mrt_direct(h_d):
    return mrt(h_d)


def ris_gain(h_br, h_ri, phases, w_r):
    """Amplitude ``|h_ri diag(exp(j phases)) h_br w_r|`` of the reflected link."""
    return abs((as_row(h_ri) * np.exp(1j * phases)) @ (np.asarray(h_br) @ w_r))


def align_phases(h_ri, h_w):
    """Phases making every term ``h_ri(k) e^{j phi_k} h_w(k)`` real and non-negative."""
    return wrap_phases(-np.angle(as_row(h_ri) * h_w))


def _initial_precoder(h_br):
    rows = np.linalg.norm(h_br, axis=1)
    return mrt(h_br[int(np.argmax(rows))])


def ao_optimize(h_br, h_ri, max_iters=100, rel_tol=1e-8, w_r_init=None, h_d=None):
    """Alternate the RIS phase rule and the BS precoder update until the
    reflected-link amplitude stops improving by more than ``rel_tol``.

    ``w_r_init`` defaults to MRT on the strongest row of ``h_br``. If ``h_d``
    is given, the returned solution also carries ``w_d = mrt(h_d)``.
    """
    h_br = np.asarray(h_br, dtype=complex)
    h_ri = as_row(h_ri)
    if h_br.ndim != 2 or h_br.shape[0] != h_ri.size:
        raise DomainError(f"h_br {h_br.shape} does not conform with h_ri {h_ri.shape}")
    if not np.any(h_br) or not np.any(h_ri):
        raise DegenerateChannelError("AO needs nonzero BS-RIS and RIS-IU channels")

    w_r = _initial_precoder(h_br) if w_r_init is None else np.asarray(w_r_init, dtype=complex)
    trace = []
    phases = None
    it = 0
    for it in range(1, max_iters + 1):
        phases = align_phases(h_ri, h_br @ w_r)
        g = (h_ri * np.exp(1j * phases)) @ h_br
        w_r = dominant_right_eigvec(g)
        obj = abs(g @ w_r)
        trace.append(obj)
        if it > 1 and abs(obj - trace[-2]) <= rel_tol * max(obj, np.finfo(float).tiny):
            break

    w_d = mrt(h_d) if h_d is not None else np.zeros(h_br.shape[1], dtype=complex)
    return BeamSolution(w_d=w_d, w_r=w_r, phases=phases, method="ao", iterations=it, trace=tuple(trace))


def dft_codebook(n):
    """Kronecker DFT codebook: columns ``mu_i (x) nu_j`` of two sqrt(n)-point DFTs."""
    side = math.isqrt(n) if n >= 1 else 0
    if n < 1 or side * side != n:
        raise ConfigError(f"DFT codebook size must be a perfect square, got {n}")
    k = np.arange(side)
    dft = np.exp(1j * TWO_PI * np.outer(k, k) / side)  # row i is mu_i
    cols = np.empty((n, n), dtype=complex)
    for i in range(side):
        for j in range(side):
            cols[:, i * side + j] = np.kron(dft[i], dft[j])
    return Codebook(n=n, columns=cols)


def codebook_powers(h_br, h_ri, codebook):
    """``||h_ri diag(v_i) h_br||^2`` for every codebook column."""
    cascaded = as_row(h_ri)[:, None] * np.asarray(h_br)  # diag(h_ri) h_br
    return np.sum(np.abs(codebook.columns.T @ cascaded) ** 2, axis=1)


def codebook_select(h_br, h_ri, codebook):
    """Pick the codebook beam with the largest received power.

    Returns ``(best_index, phases, w_dft)`` with a 0-based index. Ties go to
    the lowest index.
    """
    if len(codebook) == 0:
        raise ConfigError("empty codebook")
    if codebook.n != as_row(h_ri).size:
        raise ConfigError(f"codebook size {codebook.n} != RIS size {as_row(h_ri).size}")
    powers = codebook_powers(h_br, h_ri, codebook)
    best = int(np.argmax(powers))  # first maximal index
    v = codebook.columns[:, best]
    phases = wrap_phases(np.angle(v))
    w_dft = mrt((as_row(h_ri) * v) @ np.asarray(h_br))
    return best, phases, w_dft


def dft_beams(h_br, h_ri, codebook, h_d=None):
    best, phases, w_dft = codebook_select(h_br, h_ri, codebook)
    w_d = mrt(h_d) if h_d is not None else np.zeros_like(w_dft)
    return BeamSolution(w_d=w_d, w_r=w_dft, phases=phases, method="dft", codebook_index=best)


def random_phases(n, rng):
    if n < 1:
        raise ConfigError("random phases need n >= 1")
    return rng.uniform(0.0, TWO_PI, n)


def random_beams(h_br, h_ri, rng, h_d=None):
    """Random RIS phases with the BS precoder matched to the resulting cascade."""
    phases = random_phases(as_row(h_ri).size, rng)
    w_r = mrt((as_row(h_ri) * np.exp(1j * phases)) @ np.asarray(h_br))
    w_d = mrt(h_d) if h_d is not None else np.zeros_like(w_r)
    return BeamSolution(w_d=w_d, w_r=w_r, phases=phases, method="random")
