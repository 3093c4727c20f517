"""Dense square-matrix algebra: determinants, cofactors, inner and wedge products.

Every function accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``
and works along the last two axes.  Cofactors are built from signed minors so
they stay valid on singular matrices.
"""

import itertools

import numpy as np

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def _as_square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    n = A.shape[-1]
    if n < 2:
        raise ValueError("matrix dimension must be at least 2")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def det(A):
    """Determinant along the last two axes.

    Closed-form expansion for n <= 3, LU factorisation (numpy) otherwise.
    """
    A = _as_square(A)
    n = A.shape[-1]
    if n == 2:
        return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    if n == 3:
        return (A[..., 0, 0] * (A[..., 1, 1] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 1])
                - A[..., 0, 1] * (A[..., 1, 0] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 0])
                + A[..., 0, 2] * (A[..., 1, 0] * A[..., 2, 1] - A[..., 1, 1] * A[..., 2, 0]))
    return np.linalg.det(A)


def cofactor(A):
    """Cofactor matrix, ``cof(A)[i, j] = (-1)**(i+j) * det(minor_ij(A))``.

    Satisfies ``A.T @ cof(A) == det(A) * I`` without ever inverting A.
    """
    A = _as_square(A)
    n = A.shape[-1]
    if n == 2:
        C = np.empty_like(A)
        C[..., 0, 0] = A[..., 1, 1]
        C[..., 0, 1] = -A[..., 1, 0]
        C[..., 1, 0] = -A[..., 0, 1]
        C[..., 1, 1] = A[..., 0, 0]
        return C
    if n == 3:
        # rows of cof A are cross products of the other two rows
        a0, a1, a2 = A[..., 0, :], A[..., 1, :], A[..., 2, :]
        return np.stack([np.cross(a1, a2), np.cross(a2, a0), np.cross(a0, a1)], axis=-2)
    C = np.empty_like(A)
    idx = np.arange(n)
    for i, j in itertools.product(range(n), range(n)):
        minor = A[..., idx != i, :][..., :, idx != j]
        C[..., i, j] = (-1) ** (i + j) * det(minor)
    return C


def inner(A, B):
    """Frobenius product ``A : B`` along the last two axes."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[-2:] != B.shape[-2:]:
        raise ValueError(f"dimension mismatch: {A.shape[-2:]} vs {B.shape[-2:]}")
    return np.einsum("...ij,...ij->...", A, B)


def wedge2(xi, eta):
    """Planar wedge ``xi_1 eta_2 - xi_2 eta_1`` (det of the matrix with rows xi, eta)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if xi.shape[-1] != 2 or eta.shape[-1] != 2:
        raise ValueError("wedge2 takes 2-vectors")
    return xi[..., 0] * eta[..., 1] - xi[..., 1] * eta[..., 0]


def cof_via_J(A):
    """Planar cofactor as ``-J A J`` with J the quarter-turn rotation."""
    A = _as_square(A)
    if A.shape[-1] != 2:
        raise ValueError("cof_via_J is defined for 2x2 matrices only")
    return -(J2 @ A @ J2)


def cofactor_expansion_det(A):
    """Laplace expansion along the first row; slow reference for a single matrix."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(A[1:], j, axis=1)
        total += (-1) ** j * A[0, j] * cofactor_expansion_det(minor)
    return total


def identity_residual(A):
    """``max |A^T cof A - det(A) I|`` per matrix."""
    A = _as_square(A)
    n = A.shape[-1]
    R = np.swapaxes(A, -1, -2) @ cofactor(A) - det(A)[..., None, None] * np.eye(n)
    return np.abs(R).max(axis=(-1, -2))


def inf_norm(A):
    """Induced infinity norm (max absolute row sum)."""
    return np.abs(np.asarray(A, dtype=float)).sum(axis=-1).max(axis=-1)
