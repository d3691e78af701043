"""Complex vector kernels shared by the channel, beam and power modules.

Row vectors are stored as 1-D arrays, column vectors too; the orientation
is a matter of which side of a product they appear on. Matrices are 2-D.
"""
import math

import numpy as np

from .errors import ConvergenceError, DegenerateChannelError, DomainError

UNIT_NORM_TOL = 1e-12
CONVERGENCE_TOL = 1e-10
MAX_POWER_ITERS = 1000


def db_to_linear(x_db):
    x = float(x_db)
    if not math.isfinite(x):
        raise DomainError(f"non-finite dB value: {x_db!r}")
    return 10.0 ** (x / 10.0)


def linear_to_db(x):
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"cannot express {x!r} in dB")
    return 10.0 * math.log10(x)


def dbm_to_mw(x_dbm):
    return db_to_linear(x_dbm)


def as_row(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim == 2 and h.shape[0] == 1:
        h = h[0]
    if h.ndim != 1:
        raise DomainError(f"expected a row vector, got shape {h.shape}")
    return h


def is_unit(v, tol=UNIT_NORM_TOL):
    return abs(np.vdot(v, v).real - 1.0) <= tol


def mrt(h):
    """Maximum ratio transmission precoder ``h^H / ||h||`` for row vector ``h``."""
    h = as_row(h)
    nrm = np.linalg.norm(h)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise DegenerateChannelError("MRT requested for an all-zero channel")
    return np.conj(h) / nrm


def dominant_right_eigvec(g, tol=CONVERGENCE_TOL, max_iters=MAX_POWER_ITERS):
    """Unit vector ``v`` maximizing ``||g v||``.

    For a 1-by-M row this is exactly ``mrt(g)``. Matrices go through power
    iteration on ``g^H g``; the Gram matrix is Hermitian PSD so the iterate
    converges in phase as well as direction once the top singular value is
    separated.
    """
    g = np.asarray(g, dtype=complex)
    if g.ndim == 1 or g.shape[0] == 1:
        return mrt(g)
    if g.ndim != 2:
        raise DomainError(f"expected a matrix, got shape {g.shape}")
    if not np.any(g):
        raise DegenerateChannelError("dominant direction of a zero matrix")

    gram = g.conj().T @ g
    # Start from the heaviest column of the Gram matrix; never orthogonal to
    # the top eigenvector unless g is degenerate in a way we catch below.
    v = gram[:, np.argmax(np.linalg.norm(gram, axis=0))].copy()
    v /= np.linalg.norm(v)
    for _ in range(max_iters):
        u = gram @ v
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            raise DegenerateChannelError("power iteration collapsed to zero")
        u /= nrm
        if np.linalg.norm(u - v) < tol:
            return u
        v = u
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} iterations", last_iterate=v
    )
