"""The secular generator: assembly, evolution, steady states, and the
finite-window precursor map used as a convergence oracle.

The dissipator acts on site-basis states.  For each bin frequency w with
coupling component V_w (rotated back to the site basis) it adds

    g_w (V_w^dag rho V_w - V_w V_w^dag rho)
    + conj(g_w) (V_w^dag rho V_w - rho V_w V_w^dag)

summed over bins in ascending order.  Trace preservation, Hermiticity
preservation, and unitality of the adjoint are exact consequences of this
form and are enforced as tested invariants rather than assumptions.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.signal

from .errors import (
    DegenerateKernel,
    DimensionMismatch,
    MissingFrequency,
    NoConvergence,
    PointwiseUndefined,
    PositivityLost,
    PositivityViolation,
    StepTooCoarse,
    StepTooLarge,
)
from .linalg import EigenSystem, SuperOperator, kron_map, superop_adjoint, unvec, vec
from .reservoir import (
    CorrelationKernel,
    HalfFourierTable,
    WhiteNoise,
    decay_rate,
    sample_kernel,
)
from .spectral import BohrSpectrum, SpectralOperator, interaction_picture_batch

logger = logging.getLogger(__name__)

STABILITY_BOUND = 0.1
KERNEL_CUTOFF = 1e-10
QUADRATURE_SAFETY = 20.0


@dataclass(frozen=True)
class LindbladGenerator:
    """Coherent and dissipative parts of the master-equation generator."""

    dimension: int
    hamiltonian_part: SuperOperator
    dissipator: SuperOperator
    frequencies_used: BohrSpectrum
    gplus_used: HalfFourierTable
    dissipator_adjoint: SuperOperator = field(repr=False)

    def full_matrix(self) -> np.ndarray:
        return self.hamiltonian_part.matrix + self.dissipator.matrix

    def apply_full(self, rho: np.ndarray) -> np.ndarray:
        """d rho / dt for the given state."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dimension, self.dimension):
            raise DimensionMismatch(
                f"state shape {rho.shape} vs dimension {self.dimension}"
            )
        return unvec(self.full_matrix() @ vec(rho), self.dimension)


@dataclass(frozen=True)
class Trajectory:
    """States at every integrator step, with per-step correction logs."""

    times: np.ndarray
    states: list
    herm_defects: np.ndarray
    trace_defects: np.ndarray


def validate_density(rho: np.ndarray, n: int | None = None) -> np.ndarray:
    """Check the density-matrix invariants and return the array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {rho.shape}")
    if n is not None and rho.shape[0] != n:
        raise DimensionMismatch(f"state shape {rho.shape} vs dimension {n}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("state is not Hermitian within 1e-10")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("state trace differs from 1 by more than 1e-10")
    if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) < -1e-9:
        raise PositivityLost("state has an eigenvalue below -1e-9")
    return rho


def build_generator(
    V: SpectralOperator,
    gplus: HalfFourierTable,
    H: EigenSystem,
    positivity_tol: float = 1e-10,
) -> LindbladGenerator:
    """Assemble the generator from the coupling components and bath table.

    Raises MissingFrequency when the table lacks a bin of V's spectrum and
    PositivityViolation when any damping rate 2 Re gplus is negative beyond
    positivity_tol.
    """
    N = H.dimension
    spectrum = V.spectrum
    tol = spectrum.bin_tolerance
    rates = []
    for w in spectrum.frequencies:
        rates.append(gplus.value_at(w, tol))
    rates = np.array(rates)
    bad = spectrum.frequencies[2.0 * rates.real < -positivity_tol]
    if len(bad):
        raise PositivityViolation(
            f"negative damping rate at frequencies {bad.tolist()}"
        )
    U = H.basis
    Hmat = H.matrix()
    ident = np.eye(N, dtype=complex)
    ham = -1j * (kron_map(Hmat, ident) - kron_map(ident, Hmat))
    diss = np.zeros((N * N, N * N), dtype=complex)
    for k in range(len(spectrum)):
        Vw = U @ V.components[k] @ U.conj().T
        if np.max(np.abs(Vw)) == 0.0:
            continue
        Vd = Vw.conj().T
        g = rates[k]
        diss += g * (kron_map(Vd, Vw) - kron_map(Vw @ Vd, ident))
        diss += np.conj(g) * (kron_map(Vd, Vw) - kron_map(ident, Vw @ Vd))
    dissipator = SuperOperator(N, diss)
    return LindbladGenerator(
        dimension=N,
        hamiltonian_part=SuperOperator(N, ham),
        dissipator=dissipator,
        frequencies_used=spectrum,
        gplus_used=gplus,
        dissipator_adjoint=superop_adjoint(dissipator),
    )


def apply_adjoint(G: LindbladGenerator, A: np.ndarray) -> np.ndarray:
    """Image of an observable under the dissipator's adjoint.

    Defined through the pairing tr(A . dissipator(rho)) =
    tr(apply_adjoint(A) . rho); the coherent part is deliberately not
    included (its contribution to observables is carried by the current
    operators).
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (G.dimension, G.dimension):
        raise DimensionMismatch(f"operand {A.shape} vs dimension {G.dimension}")
    return G.dissipator_adjoint.apply(A)


def evolve(
    G: LindbladGenerator, rho0: np.ndarray, t_final: float, dt: float
) -> Trajectory:
    """Fixed-step classic Runge-Kutta integration of the master equation.

    Stores the state at every step.  Each stored state is re-Hermitized and
    trace-renormalized; the applied correction magnitudes are recorded in
    the trajectory so drift never disappears silently.  Raises StepTooLarge
    when dt violates the stability bound and PositivityLost when a state
    develops an eigenvalue below -1e-6.
    """
    rho0 = validate_density(rho0, G.dimension)
    if dt <= 0:
        raise ValueError("dt must be positive")
    M = G.full_matrix()
    norm = float(np.linalg.norm(M, np.inf))
    if dt * norm > STABILITY_BOUND:
        raise StepTooLarge(
            f"dt * ||generator|| = {dt * norm:.3e} exceeds {STABILITY_BOUND}"
        )
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if t_final == 0:
        return Trajectory(
            times=np.array([0.0]),
            states=[rho0.copy()],
            herm_defects=np.array([0.0]),
            trace_defects=np.array([0.0]),
        )
    n_steps = max(1, math.ceil(t_final / dt - 1e-12))
    h = t_final / n_steps
    states = [rho0.copy()]
    herm_defects = [0.0]
    trace_defects = [0.0]
    r = vec(rho0)
    for step in range(n_steps):
        k1 = M @ r
        k2 = M @ (r + 0.5 * h * k1)
        k3 = M @ (r + 0.5 * h * k2)
        k4 = M @ (r + h * k3)
        r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = unvec(r, G.dimension)
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        rho = (rho + rho.conj().T) / 2.0
        tr = float(np.trace(rho).real)
        trace_defects.append(abs(tr - 1.0))
        herm_defects.append(herm)
        rho = rho / tr
        low = float(np.min(np.linalg.eigvalsh(rho)))
        if low < -1e-6:
            raise PositivityLost(
                f"eigenvalue {low:.3e} at t={h * (step + 1):.6g}"
            )
        states.append(rho)
        r = vec(rho)
    times = h * np.arange(n_steps + 1)
    logger.debug(
        "evolve: %d steps, max herm defect %.3e, max trace defect %.3e",
        n_steps,
        max(herm_defects),
        max(trace_defects),
    )
    return Trajectory(
        times=times,
        states=states,
        herm_defects=np.array(herm_defects),
        trace_defects=np.array(trace_defects),
    )


def steady_state(G: LindbladGenerator) -> np.ndarray:
    """Stationary state from the kernel of the full generator matrix.

    The kernel must be one-dimensional (singular values <= 1e-10 counted);
    otherwise DegenerateKernel is raised.  The kernel vector is Hermitized
    and trace-normalized, its residual is verified, and a matrix-exponential
    consistency check is logged.
    """
    M = G.full_matrix()
    try:
        _, svals, vh = np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    n_kernel = int(np.sum(svals <= KERNEL_CUTOFF))
    if n_kernel >= 2:
        raise DegenerateKernel(
            f"{n_kernel} singular values below {KERNEL_CUTOFF}; "
            "the stationary state is not unique"
        )
    if n_kernel == 0:
        raise DegenerateKernel(
            f"smallest singular value {svals[-1]:.3e} is not numerically zero"
        )
    rho = unvec(vh[-1].conj(), G.dimension)
    rho = (rho + rho.conj().T) / 2.0
    tr = complex(np.trace(rho))
    if abs(tr) < 1e-8:
        raise DegenerateKernel("kernel vector is traceless; no stationary state")
    rho = rho / tr.real if abs(tr.imag) < abs(tr.real) else rho / tr
    rho = np.asarray(rho, dtype=complex)
    residual = float(np.linalg.norm(M @ vec(rho)))
    bound = 1e-10 * float(np.linalg.norm(M))
    if residual > bound:
        raise NoConvergence(
            f"stationary residual {residual:.3e} exceeds {bound:.3e}"
        )
    low = float(np.min(np.linalg.eigvalsh(rho)))
    if low < -1e-9:
        raise PositivityLost(f"stationary state eigenvalue {low:.3e}")
    # exponential-map consistency diagnostic on the slowest scale
    eigvals = np.linalg.eigvals(M)
    nonzero = eigvals[np.abs(eigvals) > KERNEL_CUTOFF]
    if len(nonzero):
        gap = float(np.min(np.abs(nonzero.real)))
        horizon = 1.0 / max(gap, 1e-6)
        drift = float(
            np.max(np.abs(scipy.linalg.expm(M * horizon) @ vec(rho) - vec(rho)))
        )
        logger.info(
            "steady_state: expm drift %.3e over horizon %.3g", drift, horizon
        )
    return rho


def _quadrature_bound(k: CorrelationKernel, w_max: float) -> float:
    bound = 1.0 / decay_rate(k)
    if w_max > 0:
        bound = min(bound, np.pi / w_max)
    return bound / QUADRATURE_SAFETY


def triangle_convolution(g: np.ndarray, V: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid of integral_0^s g(s - u) V(u) du on a uniform grid.

    g has shape (n,), V has shape (n, N, N); returns shape (n, N, N).
    Entry i is the trapezoid rule over u in [0, s_i] sampled at the grid.
    """
    n = len(g)
    full = scipy.signal.fftconvolve(g[:, None, None], V, axes=0)[:n]
    corr = 0.5 * (g[:, None, None] * V[0][None, :, :] + g[0] * V)
    out = h * (full - corr)
    out[0] = 0.0
    return out


def _batched_map_sum(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of X -> sum_s A_s @ X @ B_s on column-stacked X."""
    N = A.shape[-1]
    return np.einsum("sik,slj->jilk", A, B).reshape(N * N, N * N)


def pre_lindblad_generator(
    V: SpectralOperator, k: CorrelationKernel, delta: float, dt: float
) -> SuperOperator:
    """Finite-window precursor of the dissipator.

    Averages the second-order map over a window of length delta:

        (1/delta) int_0^delta ds int_0^s du
            [ g(s-u) (V_u rho V_s - V_s V_u rho)
              + conj(g(s-u)) (V_s rho V_u - rho V_u V_s) ]

    with V_t the interaction-picture coupling.  The inner integral is a
    trapezoidal convolution, the outer a trapezoid over the window; as the
    window grows this map approaches the secular dissipator like 1/delta.
    """
    if isinstance(k, WhiteNoise):
        raise PointwiseUndefined("the finite-window map needs a pointwise kernel")
    if delta <= 0 or dt <= 0:
        raise ValueError("delta and dt must be positive")
    w_max = float(np.max(np.abs(V.spectrum.frequencies)))
    bound = _quadrature_bound(k, w_max)
    if dt > bound:
        raise StepTooCoarse(f"dt={dt:.3e} exceeds the resolution bound {bound:.3e}")
    n = max(2, math.ceil(delta / dt))
    h = delta / n
    s = h * np.arange(n + 1)
    g = sample_kernel(k, s)
    U = V.eig.basis
    V_en = interaction_picture_batch(V, s)
    V_t = np.einsum("ab,sbc,dc->sad", U, V_en, U.conj())
    C = triangle_convolution(g, V_t, h)
    Cbar = triangle_convolution(np.conj(g), V_t, h)
    weights = np.full(n + 1, h)
    weights[0] = weights[-1] = h / 2.0
    weights /= delta
    N = V.eig.dimension
    ident = np.eye(N, dtype=complex)
    wC = weights[:, None, None] * C
    wCbar = weights[:, None, None] * Cbar
    eye_batch = np.broadcast_to(ident, V_t.shape)
    M = _batched_map_sum(wC, V_t)
    M -= _batched_map_sum(np.einsum("sij,sjk->sik", V_t, wC), eye_batch)
    M += _batched_map_sum(V_t, wCbar)
    M -= _batched_map_sum(eye_batch, np.einsum("sij,sjk->sik", wCbar, V_t))
    return SuperOperator(N, M)
