"""Executable identity checks behind the singular-direction augmentation.

The augmentation strategy rests on a chain of exact identities: stepping
along a right singular direction by the residual-minimizing amount also
minimizes the error norm, first for directions of the full operator, then
for directions extracted from a subspace, with an explicit formula for the
error-reduction gap when the subspace does not contain the whole error.
Each suite below draws random dense instances, evaluates both sides of one
identity with an SVD as the brute-force oracle, and reports the worst
relative deviation. Deviations are measured relative to the error-vector
norm (its square for the gap formula), the natural scale of both sides.
"""

import numpy as np

from .sparse import spmv

__all__ = [
    "residual_minimizing_step",
    "error_minimizing_step",
    "run_direction_identity_suite",
    "run_projected_identity_suite",
    "run_error_reduction_suite",
    "projection_residual_bound",
]

_TINY = 1e-300


def residual_minimizing_step(r0, Au):
    """Step length along ``u`` minimizing ``norm(r0 - a * Au)``."""
    denom = float(Au @ Au)
    if denom == 0.0:
        return 0.0
    return float(r0 @ Au) / denom


def error_minimizing_step(e, u):
    """Step length along ``u`` minimizing ``norm(e - a * u)``."""
    denom = float(u @ u)
    if denom == 0.0:
        return 0.0
    return float(e @ u) / denom


def _pick_index(rng, svals, floor):
    """Random singular-value index with sigma above ``floor * sigma_max``."""
    valid = np.flatnonzero(svals > floor * svals[0])
    return int(valid[rng.integers(valid.size)])


def run_direction_identity_suite(seed=0, n=30, trials=200):
    """Worst relative gap between the two step lengths for exact directions.

    For a right singular vector ``z`` of a dense random ``A``, the
    residual-minimizing step from ``x0`` along ``z`` equals the
    error-minimizing one. Returns the maximum of
    ``|a_res - a_err| / norm(x - x0)`` over the trials.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        A = rng.standard_normal((n, n))
        x = rng.standard_normal(n)
        x0 = rng.standard_normal(n)
        b = A @ x
        _, svals, Vt = np.linalg.svd(A)
        z = Vt[_pick_index(rng, svals, 1e-5)]
        Az = A @ z
        a_res = residual_minimizing_step(b - A @ x0, Az)
        a_err = error_minimizing_step(x - x0, z)
        scale = max(float(np.linalg.norm(x - x0)), _TINY)
        worst = max(worst, abs(a_res - a_err) / scale)
    return worst


def run_projected_identity_suite(seed=0, n=30, trials=200):
    """Worst relative gap for directions extracted from a subspace.

    Draws an orthonormal basis ``V``, places the error inside its range,
    and takes ``z`` as a right singular vector of ``A @ V``. The two step
    lengths along ``V @ z`` again coincide.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(1, n + 1))
        A = rng.standard_normal((n, n))
        V, _ = np.linalg.qr(rng.standard_normal((n, m)))
        y = rng.standard_normal(m)
        x = rng.standard_normal(n)
        x0 = x - V @ y
        b = A @ x
        AV = A @ V
        _, svals, Vt = np.linalg.svd(AV)
        z = Vt[_pick_index(rng, svals, 1e-5)]
        u = V @ z
        a_res = residual_minimizing_step(b - A @ x0, AV @ z)
        a_err = error_minimizing_step(x - x0, u)
        scale = max(float(np.linalg.norm(x - x0)), _TINY)
        worst = max(worst, abs(a_res - a_err) / scale)
    return worst


def run_error_reduction_suite(seed=0, n=30, trials=200):
    """Worst relative deviation in the error-reduction gap formula.

    With an arbitrary error vector (not confined to the subspace), the
    squared error of the residual-optimal step exceeds that of the
    error-optimal step by exactly
    ``|<x - x0, (A.T A - sigma^2 I) V z>|^2 / sigma^4``. Both sides are
    compared relative to ``norm(x - x0)**2``. The singular index is drawn
    from the top part of the spectrum (``sigma >= sigma_max / 30``): the
    identity is exact for every pair, but the quartic ``1/sigma^4`` factor
    would otherwise amplify roundoff past any useful tolerance.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(1, n + 1))
        A = rng.standard_normal((n, n))
        V, _ = np.linalg.qr(rng.standard_normal((n, m)))
        x = rng.standard_normal(n)
        x0 = rng.standard_normal(n)
        b = A @ x
        AV = A @ V
        _, svals, Vt = np.linalg.svd(AV)
        idx = _pick_index(rng, svals, 1.0 / 30.0)
        sigma = svals[idx]
        z = Vt[idx]
        u = V @ z
        e = x - x0
        a1 = residual_minimizing_step(b - A @ x0, AV @ z)
        a2 = error_minimizing_step(e, u)
        lhs = float(np.linalg.norm(e - a1 * u) ** 2 - np.linalg.norm(e - a2 * u) ** 2)
        t = A.T @ (A @ u) - sigma**2 * u
        rhs = float(e @ t) ** 2 / sigma**4
        scale = max(float(np.linalg.norm(e)) ** 2, _TINY)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def projection_residual_bound(A, b, result):
    """Residual norm of a cycle versus its orthogonal-projection bound.

    The cycle's optimal residual can be no longer than the starting
    residual's component orthogonal to the image of the search space.
    Returns ``(norm(r_new), norm(r0 - P r0))`` where ``P`` projects onto
    the span of ``A @ W`` (Krylov image together with the cached
    augmentation products), built here by explicit products and a dense QR
    as the independent route.
    """
    ws = result.workspace
    r0 = ws.beta * ws.Q[:, 0]
    W = result.W
    AW = np.column_stack([spmv(A, W[:, j]) for j in range(W.shape[1])])
    U, _ = np.linalg.qr(AW)
    projected = U @ (U.T @ r0)
    bound = float(np.linalg.norm(r0 - projected))
    r_new = b - spmv(A, result.x_new)
    return float(np.linalg.norm(r_new)), bound
