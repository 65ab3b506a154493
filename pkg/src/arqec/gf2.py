"""Exact linear algebra over GF(2).

Bit vectors and matrices are numpy ``uint8`` arrays with entries in {0, 1};
addition is XOR.  Pauli operators (modulo phase) are length-2n vectors in
(z-half | x-half) layout: per qubit, I=(0,0), X=(0,1) as (z,x), Z=(1,0),
Y=(1,1).  The symplectic product decides commutation.
"""

from __future__ import annotations

import numpy as np

from .errors import InconsistentSystemError, LengthMismatchError


def as_bits(a) -> np.ndarray:
    """Coerce array-like input to a uint8 array of 0/1 entries."""
    out = np.asarray(a, dtype=np.uint8)
    return out & 1


def gaussian_eliminate(mat) -> tuple[np.ndarray, list[int]]:
    """Reduce a GF(2) matrix to reduced row echelon form.

    Args:
        mat: array-like of shape (rows, cols) with 0/1 entries.

    Returns:
        (echelon, pivots): the RREF matrix (row-equivalent to the input)
        and the list of pivot column indices in order.
    """
    a = np.array(mat, dtype=np.uint8) & 1
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        below = np.nonzero(a[r:, c])[0]
        if below.size == 0:
            continue
        p = r + below[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(mat) -> int:
    """Rank of a GF(2) matrix."""
    _, pivots = gaussian_eliminate(mat)
    return len(pivots)


def solve(a, b) -> np.ndarray:
    """Solve A x = b over GF(2) with all free variables fixed to 0.

    ``a`` must be in row echelon form (reduced or not).  Raises
    InconsistentSystemError when b has support on a zero row of A.
    """
    a = as_bits(a)
    b = as_bits(b).ravel()
    rows, cols = a.shape
    if b.shape[0] != rows:
        raise LengthMismatchError(f"rhs length {b.shape[0]} != {rows} rows")
    x = np.zeros(cols, dtype=np.uint8)
    for i in range(rows - 1, -1, -1):
        nz = np.nonzero(a[i])[0]
        if nz.size == 0:
            if b[i]:
                raise InconsistentSystemError(f"row {i} reads 0 = 1")
            continue
        j = nz[0]
        x[j] = b[i] ^ (int(a[i, j + 1:] @ x[j + 1:]) & 1)
    return x


def kernel_basis(mat) -> np.ndarray:
    """Basis of the null space {x : M x = 0} over GF(2).

    Each basis row comes from setting exactly one free variable to 1 and the
    rest to 0, then filling the pivot variables by back-substitution.  Returns
    a (cols - rank, cols) matrix; empty for full-column-rank input.
    """
    a = as_bits(mat)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    red, pivots = gaussian_eliminate(a)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for row, f in enumerate(free):
        basis[row, f] = 1
        for i, p in enumerate(pivots):
            basis[row, p] = red[i, f]
    return basis


def swap_halves(v: np.ndarray) -> np.ndarray:
    """Swap the z and x halves of Pauli vectors along the last axis."""
    two_n = v.shape[-1]
    if two_n % 2:
        raise LengthMismatchError(f"Pauli vector length {two_n} is odd")
    n = two_n // 2
    return np.concatenate([v[..., n:], v[..., :n]], axis=-1)


def symplectic_product(a, b) -> int:
    """Symplectic product ⟨a, b⟩ = a_z·b_x + a_x·b_z (mod 2).

    Returns 0 when the Pauli operators commute and 1 when they anticommute.
    """
    a = as_bits(a).ravel()
    b = as_bits(b).ravel()
    if a.shape != b.shape:
        raise LengthMismatchError(f"lengths differ: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] % 2:
        raise LengthMismatchError(f"Pauli vector length {a.shape[0]} is odd")
    return int(a @ swap_halves(b)) & 1


def symplectic_gram(a, b) -> np.ndarray:
    """All pairwise symplectic products of the rows of two matrices.

    Args:
        a: (r, 2n) bit matrix.
        b: (s, 2n) bit matrix.

    Returns:
        (r, s) uint8 matrix with entry (i, j) = ⟨a_i, b_j⟩.
    """
    a = np.atleast_2d(as_bits(a))
    b = np.atleast_2d(as_bits(b))
    if a.shape[-1] != b.shape[-1]:
        raise LengthMismatchError(
            f"row lengths differ: {a.shape[-1]} vs {b.shape[-1]}")
    return (a @ swap_halves(b).T) & 1
