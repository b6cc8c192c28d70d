"""Dense factorizations shared by the initializer, the estimator and the generators."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class InvalidInputError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


class DegenerateInputError(InvalidInputError):
    pass


@dataclass(frozen=True)
class SvdTriplet:
    """Thin SVD ``left @ diag(singular_values) @ right.T``.

    ``left`` is n x k, ``right`` is q x k, both with orthonormal columns.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def k(self):
        return self.singular_values.shape[0]

    def reconstruct(self):
        return (self.left * self.singular_values) @ self.right.T


def as_matrix(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-d, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def _fix_signs(left, right):
    # make the largest-magnitude entry of each right vector positive
    if right.shape[1] == 0:
        return left, right
    idx = np.argmax(np.abs(right), axis=0)
    signs = np.sign(right[idx, np.arange(right.shape[1])])
    signs[signs == 0] = 1.0
    return left * signs, right * signs


def full_svd(A):
    """Economy SVD of all min(n, q) components, sign-normalized."""
    A = as_matrix(A)
    try:
        L, s, Rt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            L, s, Rt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"SVD did not converge on a {A.shape} matrix: {exc}") from exc
    L, R = _fix_signs(L, Rt.T)
    return SvdTriplet(L, s, R)


def thin_svd(A, k):
    """Top-``k`` singular triplets of ``A``."""
    A = as_matrix(A)
    if not 1 <= k <= min(A.shape):
        raise InvalidInputError(f"k={k} outside [1, {min(A.shape)}]")
    svd = full_svd(A)
    return SvdTriplet(
        np.ascontiguousarray(svd.left[:, :k]),
        svd.singular_values[:k].copy(),
        np.ascontiguousarray(svd.right[:, :k]),
    )


def truncate_rank(A, r):
    """Keep the ``r`` largest singular values of ``A`` and zero the rest."""
    A = as_matrix(A)
    if r < 1:
        raise InvalidInputError(f"rank must be >= 1, got {r}")
    if r >= min(A.shape):
        return A.copy()
    return thin_svd(A, r).reconstruct()


def qr_orthonormalize(B, rtol=1e-10):
    """Orthonormal basis (q x r) for the column span of ``B``."""
    B = as_matrix(B, "B")
    if B.shape[1] > B.shape[0]:
        raise DegenerateInputError(f"{B.shape[1]} columns cannot be independent in R^{B.shape[0]}")
    Q, R = np.linalg.qr(B, mode="reduced")
    diag = np.abs(np.diag(R))
    scale = max(np.max(np.abs(R)), np.finfo(float).tiny) if R.size else 1.0
    if np.any(diag <= rtol * scale):
        raise DegenerateInputError("columns are linearly dependent")
    return Q


def orthonormal_complement(U):
    """Columns spanning the orthogonal complement of span(U); U has orthonormal columns."""
    U = as_matrix(U, "U")
    p, r = U.shape
    if r >= p:
        return np.zeros((p, 0))
    Q, _ = np.linalg.qr(U, mode="complete")
    return Q[:, r:]


def cholesky_psd(S, jitter=1e-10, tol=1e-8):
    """Lower Cholesky factor of a symmetric positive semidefinite matrix.

    Semidefinite inputs (smallest eigenvalue within ``tol`` of zero) get
    ``jitter * I`` added before factoring.
    """
    S = as_matrix(S, "S")
    if S.shape[0] != S.shape[1]:
        raise InvalidInputError(f"S must be square, got {S.shape}")
    if S.shape[0] == 0:
        return np.zeros((0, 0))
    if not np.allclose(S, S.T, rtol=0, atol=tol * max(1.0, np.max(np.abs(S)))):
        raise InvalidInputError("S is not symmetric")
    S = 0.5 * (S + S.T)
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        pass
    min_eig = np.linalg.eigvalsh(S)[0]
    if min_eig < -tol:
        raise NumericError(f"matrix is indefinite (smallest eigenvalue {min_eig:.3e})")
    shift = jitter + max(0.0, -min_eig)
    try:
        return np.linalg.cholesky(S + shift * np.eye(S.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise NumericError("Cholesky failed after jitter") from exc


def ar1_covariance(p, rho=0.5):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])
