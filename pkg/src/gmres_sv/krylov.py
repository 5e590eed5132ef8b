"""One restart cycle of the augmented Arnoldi process.

A cycle builds the factorization ``A @ W = Q @ H`` where the search basis
``W`` holds ``m - k`` orthonormal Krylov vectors followed by ``k``
augmentation vectors carried over from the previous cycle, ``Q`` is an
orthonormal basis of the expanded space, and ``H`` is upper Hessenberg of
shape ``(m+1, m)``. The projected least-squares problem
``min_d || beta * e_1 - H @ d ||`` then yields the residual-optimal update
``x + W @ d``, with the residual norm available as the last entry of the
rotated right-hand side.

Workspaces are confined to a single solve and are not thread safe; the
sparse matrix they reference may be shared.
"""

from dataclasses import dataclass

import numpy as np

from .kernels import (
    SingularSystemError,
    UpperTriangularFactor,
    apply_chain,
    back_substitute,
    givens_qr_hessenberg,
)
from .sparse import spmv

__all__ = ["CycleWorkspace", "CycleResult", "arnoldi_expand", "run_cycle"]

_BREAKDOWN_TOL = 1e-12
_REORTH_TRIGGER = 1.0 / np.sqrt(2.0)


class CycleWorkspace:
    """Per-cycle bases and Hessenberg system.

    Attributes
    ----------
    W : (n, m) array
        Search basis; Krylov columns first, augmentation columns last.
    Q : (n, m+1) array
        Orthonormal basis being extended one column per step.
    H : (m+1, m) array
        Upper Hessenberg projection coefficients.
    beta : float
        Norm of the cycle's starting residual; ``Q[:, 0]`` is the starting
        residual scaled to unit length, so ``Q.T @ r0 = beta * e_1``.
    ncols : int
        Number of completed columns; stops short of ``m`` on breakdown.
    """

    def __init__(self, r0, m, k):
        r0 = np.asarray(r0, dtype=np.float64)
        if not 0 <= k < m:
            raise ValueError(f"need 0 <= k < m, got k={k}, m={m}")
        beta = float(np.linalg.norm(r0))
        if beta == 0.0:
            raise ValueError("starting residual is zero; nothing to solve")
        n = r0.size
        self.m = m
        self.k = k
        self.beta = beta
        self.W = np.zeros((n, m))
        self.Q = np.zeros((n, m + 1))
        self.H = np.zeros((m + 1, m))
        self.Q[:, 0] = r0 / beta
        self.W[:, 0] = self.Q[:, 0]
        self.ncols = 0
        self.breakdown = False


def arnoldi_expand(A, workspace, j, direction):
    """Orthogonalize one expansion direction and append column ``j``.

    ``direction`` is ``A @ Q[:, j]`` for a Krylov step (``j < m - k``) or the
    cached product ``A @ y`` for an augmentation step. Modified Gram-Schmidt
    is used with a single reorthogonalization pass whenever the remainder
    loses more than a factor ``1/sqrt(2)`` of its length.

    Returns ``True`` on happy breakdown, i.e. when the remainder is
    negligible and no new basis vector can be formed; the cycle then solves
    with the columns accumulated so far.
    """
    ws = workspace
    if j != ws.ncols:
        raise ValueError(f"expected expansion step {ws.ncols}, got {j}")
    if ws.breakdown:
        raise ValueError("workspace already hit breakdown")
    direction = np.asarray(direction, dtype=np.float64)
    if direction.shape != (A.n_rows,):
        raise ValueError("direction length does not match the matrix")
    scale = float(np.linalg.norm(direction))
    v = direction.copy()
    coeffs = np.zeros(j + 1)
    for i in range(j + 1):
        coeffs[i] = ws.Q[:, i] @ v
        v -= coeffs[i] * ws.Q[:, i]
    if np.linalg.norm(v) < _REORTH_TRIGGER * scale:
        for i in range(j + 1):
            extra = ws.Q[:, i] @ v
            v -= extra * ws.Q[:, i]
            coeffs[i] += extra
    remainder = float(np.linalg.norm(v))
    ws.H[: j + 1, j] = coeffs
    ws.H[j + 1, j] = remainder
    ws.ncols = j + 1
    if remainder <= _BREAKDOWN_TOL * scale:
        ws.breakdown = True
        return True
    ws.Q[:, j + 1] = v / remainder
    if j + 1 < ws.m - ws.k:
        ws.W[:, j + 1] = ws.Q[:, j + 1]
    return False


@dataclass
class CycleResult:
    """Outcome of one restart cycle.

    ``relres`` equals the magnitude of the last entry of ``rotated_rhs``
    divided by ``norm(b)``; no extra matrix products are spent on it.
    ``n_matvecs`` counts the sparse products consumed by the Krylov steps
    (augmentation steps reuse cached products and are free).
    """

    x_new: np.ndarray
    relres: float
    workspace: CycleWorkspace
    rfactor: UpperTriangularFactor
    rotated_rhs: np.ndarray
    n_matvecs: int
    n_cols: int

    @property
    def W(self):
        """Active search-basis columns."""
        return self.workspace.W[:, : self.n_cols]

    @property
    def Q(self):
        """Active orthonormal-basis columns."""
        return self.workspace.Q[:, : self.n_cols + 1]

    @property
    def H(self):
        """Active Hessenberg block."""
        return self.workspace.H[: self.n_cols + 1, : self.n_cols]


def run_cycle(A, b, x0, aug, m, r0=None):
    """Run one restarted cycle from iterate ``x0``.

    Parameters
    ----------
    A : CsrMatrix
    b : (n,) array
    x0 : (n,) array
        Current iterate; the cycle minimizes the residual of ``x0 + W @ d``.
    aug : AugmentationSet or None
        Directions carried over from the previous cycle, with their cached
        products. ``None`` or an empty set gives a pure Krylov cycle.
    m : int
        Search-space dimension per cycle.
    r0 : (n,) array, optional
        Precomputed starting residual ``b - A @ x0``; computed here when
        omitted.

    The augmented columns consume no matrix-vector products. On happy
    breakdown the least-squares problem is solved over the truncated
    system; if the truncated triangular factor is singular in its trailing
    column, that column is dropped before solving.
    """
    b = np.asarray(b, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    k = 0 if aug is None else aug.size
    if r0 is None:
        r0 = b - spmv(A, x0)
    ws = CycleWorkspace(r0, m, k)
    if k:
        ws.W[:, m - k :] = aug.Y
    n_matvecs = 0
    for j in range(m):
        if j < m - k:
            direction = spmv(A, ws.Q[:, j])
            n_matvecs += 1
        else:
            direction = aug.AY[:, j - (m - k)]
        if arnoldi_expand(A, ws, j, direction):
            break
    p = ws.ncols
    while True:
        chain, rfactor = givens_qr_hessenberg(ws.H[: p + 1, :p])
        g = np.zeros(p + 1)
        g[0] = ws.beta
        rotated = apply_chain(chain, g)
        try:
            d = back_substitute(rfactor, rotated[:p])
            break
        except SingularSystemError:
            # Only the breakdown column can be rank deficient; drop it.
            if not ws.breakdown or p <= 1:
                raise
            p -= 1
    x_new = x0 + ws.W[:, :p] @ d
    bnorm = float(np.linalg.norm(b))
    relres = abs(float(rotated[p])) / bnorm if bnorm > 0.0 else 0.0
    return CycleResult(
        x_new=x_new,
        relres=relres,
        workspace=ws,
        rfactor=rfactor,
        rotated_rhs=rotated,
        n_matvecs=n_matvecs,
        n_cols=p,
    )
