"""Seeded random density matrices under the Hilbert-Schmidt, induced, Bures,
real (two-rebit) and X-state measures.

Every sampler owns a private :class:`numpy.random.Generator` derived from
``SeedSequence(seed, spawn_key=(stream,))``: a ``(seed, stream)`` pair fully
determines the draw sequence and distinct streams share no state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qstate import (
    DensityMatrix,
    XStateParams,
    validate,
    xstate_matrix,
    xstate_separable_mask,
)

FAMILIES = ("GinibreInduced", "RealHS", "Bures", "XFlat", "XInduced")
X_DET_MAX = 1.0 / 256


@dataclass(frozen=True)
class MeasureSpec:
    """Which ensemble to sample from, with dimensions and seeding.

    ``K`` defaults to ``N`` (Hilbert-Schmidt) when omitted.
    """

    family: str
    N: int = 4
    K: int | None = None
    split: tuple[int, int] = (2, 2)
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.K is None:
            object.__setattr__(self, "K", self.N)
        object.__setattr__(self, "split", tuple(self.split))
        if self.split[0] * self.split[1] != self.N:
            raise ValueError(f"split {self.split} does not factor N={self.N}")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.family in ("XFlat", "XInduced", "RealHS", "Bures") and (self.N, self.split) != (4, (2, 2)):
            raise ValueError(f"{self.family} requires N=4 with split (2, 2)")
        if self.family == "XInduced" and self.K < self.N:
            raise ValueError("XInduced requires K >= N")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def is_xstate(self) -> bool:
        return self.family in ("XFlat", "XInduced")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream,))))

    def with_stream(self, stream: int) -> "MeasureSpec":
        return MeasureSpec(self.family, self.N, self.K, self.split, self.seed, stream)


@dataclass
class XBatch:
    """Columnar batch of X-state parameters."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    z14: np.ndarray
    z23: np.ndarray

    def __len__(self):
        return len(self.a)

    def __getitem__(self, i) -> XStateParams:
        return XStateParams(
            float(self.a[i]), float(self.b[i]), float(self.c[i]), float(self.d[i]),
            complex(self.z14[i]), complex(self.z23[i]),
        )

    def radii(self):
        return np.abs(2 * (self.a + self.b) - 1), np.abs(2 * (self.a + self.c) - 1)

    def separable(self) -> np.ndarray:
        return xstate_separable_mask(
            self.a, self.b, self.c, self.d, np.abs(self.z14) ** 2, np.abs(self.z23) ** 2
        )

    def determinants(self) -> np.ndarray:
        return (self.a * self.d - np.abs(self.z14) ** 2) * (self.b * self.c - np.abs(self.z23) ** 2)

    def matrices(self) -> np.ndarray:
        return xstate_matrix(self.a, self.b, self.c, self.d, self.z14, self.z23)

    @staticmethod
    def concat(batches) -> "XBatch":
        return XBatch(*(np.concatenate([getattr(b, f) for b in batches]) for f in "a b c d z14 z23".split()))


def _complex_normal(rng, shape):
    """Complex Gaussian entries with standard-normal real and imaginary parts."""
    return rng.standard_normal(shape[:-1] + (2 * shape[-1],)).view(np.complex128)


def _normalize(w: np.ndarray) -> np.ndarray:
    tr = np.einsum("...ii->...", w).real
    return w / tr[..., None, None]


def haar_unitaries(rng, n: int, N: int) -> np.ndarray:
    """Haar-random unitaries via QR of complex Ginibre matrices with phase correction."""
    q, r = np.linalg.qr(_complex_normal(rng, (n, N, N)))
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[..., None, :]


class Sampler:
    """Stateful sampler for one :class:`MeasureSpec` stream.

    Parameters
    ----------
    spec : MeasureSpec
    method : {'marginal', 'rejection'}
        X-state families only. ``'rejection'`` draws the diagonal uniformly
        on the simplex and the coherences uniformly on ``[-1/2, 1/2]^2``,
        accepting points inside the X body (then thinning by
        ``(det / det_max)^(K-4)`` for the induced family). ``'marginal'``
        samples the identical measure directly: the disk areas
        ``pi a d`` and ``pi b c`` integrate out to a Dirichlet(K-2) law on
        the diagonal, and ``|z|^2 / (a d)`` is Beta(1, K-3).
    """

    def __init__(self, spec: MeasureSpec, method: str = "marginal"):
        if method not in ("marginal", "rejection"):
            raise ValueError(f"unknown method {method!r}")
        self.spec = spec
        self.method = method
        self.rng = spec.rng()
        self.proposed = 0
        self.accepted = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 1.0

    # -- matrix families -------------------------------------------------
    def matrices(self, n: int) -> np.ndarray:
        """Draw ``n`` density matrices as an ``(n, N, N)`` array."""
        s = self.spec
        N, K = s.N, s.K
        rng = self.rng
        if s.family == "GinibreInduced":
            g = _complex_normal(rng, (n, N, K))
            w = g @ g.conj().swapaxes(-1, -2)
        elif s.family == "RealHS":
            # real Wishart density is det^((cols - N - 1) / 2): one extra column makes K=N flat
            g = rng.standard_normal((n, N, K + 1))
            w = (g @ g.swapaxes(-1, -2)).astype(complex)
        elif s.family == "Bures":
            g = _complex_normal(rng, (n, N, N))
            u = haar_unitaries(rng, n, N)
            m = (np.eye(N) + u) @ g
            w = m @ m.conj().swapaxes(-1, -2)
        else:
            return self.xstates(n).matrices()
        self.proposed += n
        self.accepted += n
        return _normalize(w)

    # -- X-state families ------------------------------------------------
    def xstates(self, n: int) -> XBatch:
        if not self.spec.is_xstate:
            raise ValueError(f"{self.spec.family} is not an X-state family")
        if self.method == "marginal":
            return self._x_marginal(n)
        return self._x_rejection(n)

    def _x_marginal(self, n):
        rng, K = self.rng, self.spec.K
        w = rng.dirichlet(np.full(4, K - 2.0), n)
        a, b, c, d = w.T
        if K == 4:
            u, v = rng.random(n), rng.random(n)
        else:
            u, v = rng.beta(1.0, K - 3.0, n), rng.beta(1.0, K - 3.0, n)
        phase = np.exp(2j * np.pi * rng.random((2, n)))
        z14 = np.sqrt(a * d * u) * phase[0]
        z23 = np.sqrt(b * c * v) * phase[1]
        self.proposed += n
        self.accepted += n
        return XBatch(a, b, c, d, z14, z23)

    def _x_rejection(self, n):
        rng, K = self.rng, self.spec.K
        out, have = [], 0
        while have < n:
            m = max(1024, int(1.2 * (n - have) / 0.0117))
            w = rng.dirichlet(np.ones(4), m)
            a, b, c, d = w.T
            z = rng.random((m, 4)) - 0.5
            z14 = z[:, 0] + 1j * z[:, 1]
            z23 = z[:, 2] + 1j * z[:, 3]
            ok = (np.abs(z14) ** 2 <= a * d) & (np.abs(z23) ** 2 <= b * c)
            self.proposed += m
            batch = XBatch(a[ok], b[ok], c[ok], d[ok], z14[ok], z23[ok])
            if K > 4:
                p = (batch.determinants() / X_DET_MAX) ** (K - 4)
                keep = rng.random(len(batch)) < p
                batch = XBatch(*(getattr(batch, f)[keep] for f in "a b c d z14 z23".split()))
            out.append(batch)
            have += len(batch)
        full = XBatch.concat(out)
        # surplus draws are discarded so the stream stays tied to n alone
        result = XBatch(*(getattr(full, f)[:n] for f in "a b c d z14 z23".split()))
        self.accepted += have
        return result

    def sample(self):
        """One draw: a :class:`DensityMatrix`, or :class:`XStateParams` for X families."""
        if self.spec.is_xstate:
            return self.xstates(1)[0]
        return validate(self.matrices(1)[0], tol=1e-10, split=self.spec.split)


def _first(spec, family):
    if spec.family != family:
        raise ValueError(f"expected a {family} spec, got {spec.family}")
    return Sampler(spec).sample()


def sample_induced(spec: MeasureSpec) -> DensityMatrix:
    return _first(spec, "GinibreInduced")


def sample_real_hs(spec: MeasureSpec) -> DensityMatrix:
    return _first(spec, "RealHS")


def sample_bures(spec: MeasureSpec) -> DensityMatrix:
    return _first(spec, "Bures")


def sample_x_flat(spec: MeasureSpec) -> XStateParams:
    return _first(spec, "XFlat")


def sample_x_induced(spec: MeasureSpec) -> XStateParams:
    return _first(spec, "XInduced")
