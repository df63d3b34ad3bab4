"""Frequency-resolved operator decompositions.

An operator A is split into components A_w connecting eigenstates whose
energy difference falls in the bin of frequency w.  Components live in the
energy basis; rotation back to the site basis happens where results are
reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BinCollision, DimensionMismatch
from .linalg import EigenSystem

DEFAULT_FREQ_TOL_SCALE = 1e-9


def default_freq_tol(eig: EigenSystem) -> float:
    """Default binning tolerance: 1e-9 relative to the largest energy."""
    scale = float(np.max(np.abs(eig.energies))) if eig.dimension else 0.0
    return DEFAULT_FREQ_TOL_SCALE * max(1.0, scale)


@dataclass(frozen=True)
class BohrSpectrum:
    """Sorted distinct transition frequencies with their bin tolerance."""

    frequencies: np.ndarray
    bin_tolerance: float

    def index_of(self, omega: float) -> int | None:
        """Index of the bin containing omega, or None."""
        if len(self.frequencies) == 0:
            return None
        k = int(np.argmin(np.abs(self.frequencies - omega)))
        if abs(self.frequencies[k] - omega) <= self.bin_tolerance:
            return k
        return None

    def __len__(self) -> int:
        return len(self.frequencies)


def bohr_frequencies(eig: EigenSystem, freq_tol: float) -> BohrSpectrum:
    """Cluster all pairwise energy differences into frequency bins.

    Greedy sorted sweep: a new cluster starts whenever the gap to the
    previous difference exceeds a linkage of freq_tol/4.  The tighter
    linkage keeps genuinely distinct transition frequencies in separate
    clusters, so an oversized freq_tol shows up as two centers closer
    than freq_tol instead of being silently merged away.  Cluster
    centers are anti-symmetrized afterwards so the set is exactly
    closed under negation and contains an exact zero.

    Raises BinCollision when two cluster centers end up closer than
    freq_tol, or when a difference strays more than freq_tol from its
    center (both mean freq_tol is unsuited to this spectrum).
    """
    if freq_tol <= 0:
        raise ValueError("freq_tol must be positive")
    w = eig.energies
    diffs = np.sort((w[:, None] - w[None, :]).ravel())
    linkage = freq_tol / 4.0
    centers = []
    start = 0
    for i in range(1, len(diffs) + 1):
        if i == len(diffs) or diffs[i] - diffs[i - 1] > linkage:
            centers.append(float(np.mean(diffs[start:i])))
            start = i
    centers = np.array(centers)
    # enforce exact negation symmetry (the raw difference set is symmetric,
    # so clusters pair up; average each with its mirror)
    centers = (centers - centers[::-1]) / 2.0
    if np.any(np.diff(centers) <= freq_tol):
        raise BinCollision(
            "cluster centers closer than the bin tolerance; "
            "freq_tol is too large for this spectrum"
        )
    nearest = np.min(np.abs(diffs[:, None] - centers[None, :]), axis=1)
    if np.max(nearest) > freq_tol:
        raise BinCollision(
            "a transition frequency lies farther than freq_tol from every "
            "cluster center; freq_tol is too small for this spectrum"
        )
    return BohrSpectrum(frequencies=centers, bin_tolerance=freq_tol)


@dataclass(frozen=True)
class SpectralOperator:
    """An operator resolved into frequency components.

    source is the full operator in the energy basis; components[k] holds
    the part assigned to spectrum.frequencies[k].  The generating
    EigenSystem is kept for basis rotations downstream.
    """

    source: np.ndarray
    components: np.ndarray
    spectrum: BohrSpectrum
    eig: EigenSystem = field(repr=False)

    def component(self, k: int) -> np.ndarray:
        return self.components[k]


def decompose(A: np.ndarray, eig: EigenSystem, spectrum: BohrSpectrum) -> SpectralOperator:
    """Resolve a site-basis operator into frequency components.

    The operator is rotated into the energy basis and each matrix element
    (n, m) is assigned to the bin nearest to energies[n] - energies[m].
    The components sum to the rotated operator exactly.
    """
    A = np.asarray(A, dtype=complex)
    N = eig.dimension
    if A.shape != (N, N):
        raise DimensionMismatch(f"operator shape {A.shape} vs dimension {N}")
    A_en = eig.to_energy_basis(A)
    w = eig.energies
    gaps = w[:, None] - w[None, :]
    bins = np.argmin(np.abs(gaps[:, :, None] - spectrum.frequencies[None, None, :]), axis=2)
    comps = np.zeros((len(spectrum), N, N), dtype=complex)
    for k in range(len(spectrum)):
        comps[k] = np.where(bins == k, A_en, 0.0)
    return SpectralOperator(source=A_en, components=comps, spectrum=spectrum, eig=eig)


def interaction_picture(sop: SpectralOperator, tau: float) -> np.ndarray:
    """Evaluate sum_w exp(i w tau) A_w in the energy basis."""
    phases = np.exp(1j * sop.spectrum.frequencies * tau)
    return np.einsum("f,fij->ij", phases, sop.components)


def interaction_picture_batch(sop: SpectralOperator, taus: np.ndarray) -> np.ndarray:
    """Vectorized interaction_picture over a time grid; returns (T, N, N)."""
    phases = np.exp(1j * np.outer(taus, sop.spectrum.frequencies))
    return np.einsum("tf,fij->tij", phases, sop.components)


def component_at(sop: SpectralOperator, omega: float, spectrum: BohrSpectrum) -> np.ndarray:
    """Component for the bin containing omega, or a zero matrix."""
    k = spectrum.index_of(omega)
    N = sop.source.shape[0]
    if k is None:
        return np.zeros((N, N), dtype=complex)
    return sop.components[k].copy()
