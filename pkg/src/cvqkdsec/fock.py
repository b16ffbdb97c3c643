"""Truncated Fock-space numerics: state constructors and trace distances.

Everything is expressed in shot-noise units with the amplitude convention

    alpha = (q + i p) / sqrt(2),    d^2 alpha = (1/2) dq dp,

so that |alpha|^2 is the mean photon number of the coherent state |alpha>
and a quadrature sampled with variance N produces N mean photons.

States are truncated, not renormalized: a state built under a policy with
tolerance tau_trunc carries squared norm (or trace) in [1 - tau_trunc, 1].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

# Largest truncation dimension the module will resolve; coherent amplitudes
# needing more than this raise ResourceError.
N_MAX_CAP = 4096

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10


class ResourceError(RuntimeError):
    """The requested computation exceeds the supported truncation size."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock-space truncation rule.

    ``n_max=None`` selects AUTO: the smallest cutoff whose thermal tail
    (for the given mean photon number) and Poisson tail (for the largest
    coherent amplitude in play) are both below ``tau_trunc``.
    """

    n_max: int | None = None
    tau_trunc: float = 1e-9

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be a positive integer")
        if not 0.0 < self.tau_trunc < 1.0:
            raise ValueError("tau_trunc must lie in (0, 1)")

    def resolve(self, thermal_mean: float = 0.0, max_mean_photons: float = 0.0) -> int:
        """Return the truncation cutoff n_max for the given photon scales."""
        if self.n_max is not None:
            return self.n_max
        n = 0
        if thermal_mean > 0.0:
            # tail of N^n/(N+1)^(n+1) beyond m is (N/(N+1))^(m+1)
            n = max(n, math.ceil(math.log(self.tau_trunc)
                                 / math.log(thermal_mean / (thermal_mean + 1.0)) - 1.0))
        if max_mean_photons > 0.0:
            k = int(stats.poisson.isf(self.tau_trunc, max_mean_photons))
            while stats.poisson.sf(k, max_mean_photons) >= self.tau_trunc:
                k += 1
            n = max(n, k)
        if n > N_MAX_CAP:
            raise ResourceError(
                f"required Fock cutoff n_max={n} exceeds the supported cap {N_MAX_CAP}"
            )
        return max(n, 1)


@dataclass(frozen=True)
class FockVector:
    """Pure state on a truncated Fock space (amplitudes indexed by photon number)."""

    dim: int
    amps: np.ndarray

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def projector(self) -> "DensityOperator":
        return DensityOperator(self.dim, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian PSD matrix on a truncated Fock space (trace may sit below 1)."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {self.matrix.shape} != ({self.dim}, {self.dim})")
        dev = np.abs(self.matrix - self.matrix.conj().T).max()
        if dev > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self) -> None:
        """Run the full diagnostics (PSD up to numerical noise)."""
        lo = np.linalg.eigvalsh(self.matrix)[0]
        if lo < -PSD_TOL:
            warnings.warn(
                f"density operator has negative eigenvalue {lo:.3e}", RuntimeWarning
            )


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) up to dim - 1.

    Uses the running recurrence c_n = c_{n-1} alpha / sqrt(n), which stays
    finite far beyond the n ~ 170 overflow point of explicit factorials.
    """
    amps = np.empty(dim, dtype=complex)
    amps[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def coherent_vector(alpha: complex, policy: TruncationPolicy = TruncationPolicy()) -> FockVector:
    """Truncated coherent state |alpha>; squared norm >= 1 - tau_trunc."""
    dim = policy.resolve(max_mean_photons=abs(alpha) ** 2) + 1
    return FockVector(dim, coherent_amplitudes(alpha, dim))


def thermal_state(N: float, policy: TruncationPolicy = TruncationPolicy()) -> DensityOperator:
    """Thermal state with N mean photons: diag entries N^n / (N+1)^(n+1)."""
    if N < 0:
        raise ValueError(f"mean photon number must be >= 0, got {N}")
    dim = policy.resolve(thermal_mean=N) + 1
    if N == 0.0:
        diag = np.zeros(dim)
        diag[0] = 1.0
    else:
        n = np.arange(dim)
        diag = np.exp(n * math.log(N) - (n + 1) * math.log(N + 1.0))
    return DensityOperator(dim, np.diag(diag).astype(complex))


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """(1/2) sum |eigenvalues| of rho - sigma (Hermitian eigendecomposition)."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} != {sigma.dim}")
    eig = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return float(0.5 * np.abs(eig).sum())


def coherent_trace_distance(alpha: complex, alpha2: complex) -> float:
    """Closed form sqrt(1 - e^{-|alpha - alpha2|^2}) for two coherent states."""
    return math.sqrt(-math.expm1(-abs(alpha - alpha2) ** 2))
