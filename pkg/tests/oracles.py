"""Reference computations that share no code with the package."""
import math

import numpy as np


def jacobi_singular_values(a, sweeps=60, tol=1e-15):
    """One-sided (Hestenes) Jacobi SVD; returns singular values, descending."""
    u = np.array(a, dtype=complex, copy=True)
    n = u.shape[1]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = np.vdot(u[:, p], u[:, p]).real
                beta = np.vdot(u[:, q], u[:, q]).real
                gamma = np.vdot(u[:, p], u[:, q])
                mag = abs(gamma)
                if mag == 0 or mag <= tol * math.sqrt(alpha * beta):
                    continue
                off = max(off, mag / math.sqrt(alpha * beta))
                # rotate column q so the coupling is real, then a real Givens step
                u[:, q] *= np.conj(gamma) / mag
                zeta = (beta - alpha) / (2 * mag)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                c = 1 / math.sqrt(1 + t * t)
                s = c * t
                up, uq = u[:, p].copy(), u[:, q].copy()
                u[:, p] = c * up - s * uq
                u[:, q] = s * up + c * uq
        if off < tol:
            break
    return np.sort(np.sqrt(np.sum(np.abs(u) ** 2, axis=0)))[::-1]


def brute_composite(h_d, h_br, h_ri, phases):
    out = [complex(x) for x in h_d]
    for k in range(len(h_ri)):
        coef = h_ri[k] * complex(math.cos(phases[k]), math.sin(phases[k]))
        for m in range(len(out)):
            out[m] += coef * h_br[k][m]
    return np.array(out)


def exhaustive_codebook_scan(h_br, h_ri, columns):
    """Received power for each beam, by explicit diag-matrix products."""
    best, best_p = None, -1.0
    for i in range(columns.shape[1]):
        g = h_ri @ np.diag(columns[:, i]) @ h_br
        p = float(np.sum(np.abs(g) ** 2))
        if p > best_p:
            best, best_p = i, p
    return best, best_p


def rate_two_codeword_alpha(alpha, p, c1, c2):
    return math.log2(1 + alpha * p * c2) + math.log2(1 + (1 - alpha) * p * c1)


def random_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
