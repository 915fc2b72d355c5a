"""Density matrices, reductions, partial transposes and the PPT test.

Basis ordering is row-major tensor order: basis index ``k = iA * dB + iB``
for the product vector ``|iA>|iB>``. A matrix entry ``rho[k, l]`` is thus
``rho[(iA, iB), (jA, jB)]`` and reshaping an ``(N, N)`` array to
``(dA, dB, dA, dB)`` yields axes ``[iA, iB, jA, jB]``.

Every array-level helper (``ptrace``, ``ptranspose``, ``min_eigenvalues``,
``purities``, ``ppt_mask``) accepts a stack of matrices with arbitrary
leading batch dimensions; the :class:`DensityMatrix` functions wrap them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NoSplit, NotHermitian, NotPositive, NotUnitTrace, WrongDim

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
PPT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix, optionally carrying a bipartite split ``(dA, dB)``."""

    entries: np.ndarray
    split: tuple[int, int] | None = None

    def __post_init__(self):
        n = self.entries.shape[0]
        if self.split is not None and self.split[0] * self.split[1] != n:
            raise WrongDim(f"split {self.split} does not factor dimension {n}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class XStateParams:
    """Two-qubit X-state: diagonal ``a, b, c, d`` and coherences ``z14``, ``z23``."""

    a: float
    b: float
    c: float
    d: float
    z14: complex = 0j
    z23: complex = 0j
    tol: float = field(default=1e-12, repr=False, compare=False)

    def check(self):
        diag = np.array([self.a, self.b, self.c, self.d], dtype=float)
        if diag.min() < -self.tol:
            raise NotPositive(-diag.min(), "negative diagonal entry")
        if abs(diag.sum() - 1) > self.tol:
            raise NotUnitTrace(abs(diag.sum() - 1))
        excess = max(abs(self.z14) ** 2 - self.a * self.d, abs(self.z23) ** 2 - self.b * self.c)
        if excess > self.tol:
            raise NotPositive(excess, "|z|^2 exceeds product of diagonal entries")
        return self


def _split(rho: DensityMatrix) -> tuple[int, int]:
    if rho.split is None:
        raise NoSplit("density matrix has no bipartite split")
    return rho.split


def validate(m, tol: float = HERMITIAN_TOL, split=None, psd_tol: float = PSD_TOL) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity, returning a :class:`DensityMatrix`.

    The trace is renormalized to exactly one when it is already within ``tol``.
    """
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise WrongDim(f"expected a square matrix, got shape {m.shape}")
    herm_err = np.abs(m - m.conj().T).max(initial=0.0)
    if herm_err > tol:
        raise NotHermitian(herm_err)
    tr = np.trace(m).real
    if abs(tr - 1) > tol:
        raise NotUnitTrace(abs(tr - 1))
    m = m / tr
    lam = np.linalg.eigvalsh(m)[0]
    if lam < -psd_tol:
        raise NotPositive(-lam)
    return DensityMatrix(m, tuple(split) if split is not None else None)


def ptrace(arr: np.ndarray, split, subsystem: str = "A") -> np.ndarray:
    """Reduced matrices of ``subsystem`` ('A' or 'B') for a stack of bipartite matrices.

    Rows and columns are indexed ``iA * dB + iB``; the other factor is traced out.
    """
    dA, dB = split
    t = arr.reshape(arr.shape[:-2] + (dA, dB, dA, dB))
    if subsystem == "A":
        return np.einsum("...ijkj->...ik", t)
    if subsystem == "B":
        return np.einsum("...ijil->...jl", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def ptranspose(arr: np.ndarray, split, subsystem: str = "B") -> np.ndarray:
    """Transpose the indices of one tensor factor of a stack of matrices."""
    dA, dB = split
    lead = arr.shape[:-2]
    t = arr.reshape(lead + (dA, dB, dA, dB))
    k = len(lead)
    axes = list(range(k))
    if subsystem == "B":
        # [iA, iB, jA, jB] -> [iA, jB, jA, iB]
        axes += [k, k + 3, k + 2, k + 1]
    elif subsystem == "A":
        axes += [k + 2, k + 1, k, k + 3]
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.transpose(axes).reshape(arr.shape)


def min_eigenvalues(arr: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of each Hermitian matrix in a stack (LAPACK ``heevd``)."""
    return np.linalg.eigvalsh(arr)[..., 0]


def purities(arr: np.ndarray) -> np.ndarray:
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return np.einsum("...ij,...ij->...", arr, arr.conj()).real


def ppt_mask(arr: np.ndarray, split, tol: float = PPT_TOL) -> np.ndarray:
    return min_eigenvalues(ptranspose(arr, split, "B")) >= -tol


def partial_trace(rho: DensityMatrix, subsystem: str = "A") -> DensityMatrix:
    """Reduced state of ``subsystem``, obtained by tracing out the other factor.

    ``subsystem='A'`` returns the ``dA x dA`` state of A; ``'B'`` the
    ``dB x dB`` state of B.
    """
    split = _split(rho)
    return validate(ptrace(rho.entries, split, subsystem), tol=1e-10, split=None)


def partial_transpose(rho: DensityMatrix, subsystem: str = "B") -> np.ndarray:
    return ptranspose(rho.entries, _split(rho), subsystem)


def min_eigenvalue(h) -> float:
    h = np.asarray(h)
    err = np.abs(h - h.conj().T).max(initial=0.0)
    if err > 1e-10:
        raise NotHermitian(err)
    return float(np.linalg.eigvalsh(h)[0])


def is_ppt(rho: DensityMatrix, tol: float = PPT_TOL) -> bool:
    """Positive-partial-transpose test, transposing subsystem B.

    Equivalent to separability when ``dA * dB <= 6``.
    """
    return min_eigenvalue(partial_transpose(rho, "B")) >= -tol


def purity(rho: DensityMatrix) -> float:
    return float(purities(np.asarray(rho.entries)))


def xstate_matrix(a, b, c, d, z14, z23) -> np.ndarray:
    """Stack of 4x4 X-state matrices from arrays (or scalars) of parameters."""
    a, b, c, d, z14, z23 = np.broadcast_arrays(*(np.asarray(v) for v in (a, b, c, d, z14, z23)))
    m = np.zeros(a.shape + (4, 4), dtype=complex)
    m[..., 0, 0], m[..., 1, 1], m[..., 2, 2], m[..., 3, 3] = a, b, c, d
    m[..., 0, 3], m[..., 3, 0] = z14, np.conj(z14)
    m[..., 1, 2], m[..., 2, 1] = z23, np.conj(z23)
    return m


def xstate_to_density(x: XStateParams) -> DensityMatrix:
    x.check()
    return validate(xstate_matrix(x.a, x.b, x.c, x.d, x.z14, x.z23), split=(2, 2))


def xstate_separable_mask(a, b, c, d, z14_sq, z23_sq):
    """Closed-form PPT test on arrays of X-state parameters (``z*_sq`` are ``|z|^2``)."""
    # transposing B moves z14 to the (2,3) slot and z23 to the (1,4) slot
    return (z14_sq <= b * c) & (z23_sq <= a * d)


def xstate_is_separable(x: XStateParams) -> bool:
    return bool(xstate_separable_mask(x.a, x.b, x.c, x.d, abs(x.z14) ** 2, abs(x.z23) ** 2))
