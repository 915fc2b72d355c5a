"""Bloch radii of reduced subsystem states.

The generalized radius of a ``d``-level state is normalized to ``[0, 1]``::

    R = sqrt((d * Tr(rho^2) - 1) / (d - 1))

so the maximally mixed state maps to 0, pure states to 1, and ``d = 2``
gives the ordinary Bloch radius ``sqrt(2 Tr(rho^2) - 1)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import OutOfRange, WrongDim
from .qstate import DensityMatrix, XStateParams, ppt_mask, ptrace, purities, xstate_is_separable


class RadiusPair(NamedTuple):
    rA: float
    rB: float
    separable: bool = False

    def check(self, tol=1e-12):
        for r in (self.rA, self.rB):
            if not -tol <= r <= 1 + tol:
                raise OutOfRange(f"radius {r} outside [0, 1]")
        return self


def radius_from_purity(p, d: int):
    """Vectorized generalized Bloch radius for purity ``p`` of a ``d``-level state."""
    if d < 2:
        raise WrongDim(f"radius needs d >= 2, got {d}")
    return np.sqrt(np.maximum(0.0, (d * np.asarray(p) - 1) / (d - 1)))


def bloch_radius(rho: DensityMatrix) -> float:
    if rho.dim != 2:
        raise WrongDim(f"bloch_radius needs a qubit, got dimension {rho.dim}")
    return float(radius_from_purity(purities(rho.entries), 2))


def generalized_bloch_radius(rho: DensityMatrix) -> float:
    return float(radius_from_purity(purities(rho.entries), rho.dim))


def xstate_radii(x: XStateParams) -> RadiusPair:
    """Radii from the diagonal reductions ``diag(a+b, c+d)`` and ``diag(a+c, b+d)``."""
    return RadiusPair(abs(2 * (x.a + x.b) - 1), abs(2 * (x.a + x.c) - 1), xstate_is_separable(x))


def subsystem_radii(arr: np.ndarray, split) -> tuple[np.ndarray, np.ndarray]:
    """Generalized radii of both reductions of a stack of bipartite matrices."""
    dA, dB = split
    rA = radius_from_purity(purities(ptrace(arr, split, "A")), dA)
    rB = radius_from_purity(purities(ptrace(arr, split, "B")), dB)
    return rA, rB


class BlochRadiiTransformer(TransformerMixin, BaseEstimator):
    """Map a stack of bipartite density matrices to ``(rA, rB)`` rows.

    Parameters
    ----------
    split : tuple of int
        Subsystem dimensions ``(dA, dB)``.
    with_ppt : bool
        Append the PPT flag (as 0.0/1.0) as a third column.
    """

    def __init__(self, split=(2, 2), with_ppt=False):
        self.split = split
        self.with_ppt = with_ppt

    def _check(self, X):
        X = np.asarray(X)
        n = int(np.prod(self.split))
        if X.ndim != 3 or X.shape[1:] != (n, n):
            raise ValueError(f"expected array of shape (n_samples, {n}, {n}), got {X.shape}")
        return X

    def fit(self, X, y=None):
        X = self._check(X)
        self.n_features_in_ = 2
        self.dim_ = X.shape[1]
        return self

    def transform(self, X):
        X = self._check(X)
        rA, rB = subsystem_radii(X, self.split)
        cols = [rA, rB]
        if self.with_ppt:
            cols.append(ppt_mask(X, self.split).astype(float))
        return np.column_stack(cols)
