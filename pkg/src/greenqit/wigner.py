"""Wigner transforms of one-particle density matrices and of lesser Green functions.

Conventions (hbar = 1, one space and one time dimension):

* The Wigner function is ``W(x, p) = (1/2pi) int dy rho(x + y/2, x - y/2) e^{-ipy}``.
  On the grid the half-step sample ``rho(x_j + y/2, x_j - y/2)`` is replaced by
  the integer offset ``rho[j+m, j-m]`` (relative step ``2 dx``), which puts the
  momenta on ``p_k = pi k / (n dx)``.  The prefactor is then ``dx / pi`` and the
  momentum marginal ``sum_k W[j, k] dp = rho[j, j]`` holds exactly.
* The generalized distribution of a lesser Green function follows
  ``g(k, W, R, T) = int dr dtau e^{i(W tau - k r)} G(R + r/2, T + tau/2; R - r/2, T - tau/2)``
  with the same integer-offset rule on both relative axes, prefactor ``4 dx dt``.
  The input array holds ``-i G^<`` so that the output is real.

Overlap identity constants (derived by expanding both sides on the grid):

* Summing ``W_A W_B`` over momenta collapses the two offset sums onto
  ``m' = -m``; summing over centres then visits every index pair ``(a, b)``
  with ``a + b`` even exactly once.  The even-parity sublattice has twice the
  cell area of the full grid, so for states resolved on the grid
  ``sum_even A_ab B_ba ~= (1/2) sum_all A_ab B_ba`` up to the checkerboard
  Fourier component, which is exponentially small.  Collecting prefactors,
  ``Tr(rho_A rho_B) = 2 pi sum W_A W_B dx dp``.
* For the Green-function distribution each open axis contributes the same
  ``2 pi``, giving ``Tr(G_A G_B) = sum g_A g_B dk dW dR dT / (2 pi)^2``.  A
  periodic time axis maps every ``(c, s)`` and ``(c + n/2, s + n/2)`` to the
  same time pair, doubling the time sum, so the right-hand side picks up an
  extra ``1/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .numerics import Grid1D, TimeGrid, is_power_of_two

__all__ = [
    "DensityMatrix1P",
    "LesserGreenFunction",
    "WignerFunction",
    "GWD",
    "NegativityReport",
    "Fock",
    "Gaussian",
    "Superposition",
    "Mixture",
    "hermite_functions",
    "oscillator_state_factory",
    "toy_g_lesser",
    "wigner_transform",
    "gwd_transform",
    "overlap_trace",
    "negativity_report",
    "WIGNER_TRACE_CONSTANT",
]

WIGNER_TRACE_CONSTANT = 2.0 * math.pi


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityMatrix1P:
    """One-particle density matrix ``rho[i, j] ~ rho(x_i, x_j)`` on ``grid``."""

    grid: Grid1D
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        n = self.grid.n
        if rho.shape != (n, n):
            raise ValueError(f"rho must have shape {(n, n)}, got {rho.shape}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > 1e-10:
            raise ValueError(f"density matrix is not Hermitian (deviation {herm:.3e})")
        tr = float(np.real(np.trace(rho))) * self.grid.dx
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T) * self.grid.dx)[0]
        if lam_min < -1e-9:
            raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {lam_min:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dx(self) -> float:
        return self.grid.dx

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho))) * self.dx

    def density(self) -> np.ndarray:
        """Diagonal ``rho(x, x)``."""
        return np.real(np.diag(self.rho)).copy()


@dataclass(frozen=True)
class LesserGreenFunction:
    """Two-time array ``g[i, a, j, b] ~ -i G^<(x_i t_a; x_j t_b)``."""

    grid: Grid1D
    times: TimeGrid
    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex)
        shape = (self.grid.n, self.times.n, self.grid.n, self.times.n)
        if g.shape != shape:
            raise ValueError(f"g must have shape {shape}, got {g.shape}")
        herm = np.max(np.abs(g - g.transpose(2, 3, 0, 1).conj()))
        if herm > 1e-10:
            raise ValueError(f"Green function violates Hermiticity in the combined index ({herm:.3e})")
        diag = np.einsum("iaia->ia", g)
        if np.max(np.abs(diag.imag)) > 1e-10 or np.min(diag.real) < -1e-10:
            raise ValueError("equal-time diagonal must be real and nonnegative")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def equal_time(self, a: int) -> np.ndarray:
        """Equal-time slice ``g[:, a, :, a]`` (a one-particle density matrix)."""
        return self.g[:, a, :, a]

    def particle_number(self, a: int) -> float:
        return float(np.real(np.trace(self.equal_time(a)))) * self.grid.dx


@dataclass(frozen=True)
class WignerFunction:
    grid: Grid1D
    p_values: np.ndarray
    w: np.ndarray
    imag_residue: float = 0.0

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def dp(self) -> float:
        return float(self.p_values[1] - self.p_values[0])

    @property
    def cell(self) -> float:
        return self.dx * self.dp

    def axes(self) -> dict[str, np.ndarray]:
        return {"x": self.grid.points, "p": self.p_values}

    def normalization(self) -> float:
        return float(np.sum(self.w) * self.cell)


@dataclass(frozen=True)
class GWD:
    """Generalized Wigner distribution ``g_w[k, omega, R, T]``."""

    k: np.ndarray
    omega: np.ndarray
    R: np.ndarray
    T: np.ndarray
    g_w: np.ndarray
    periodic_time: bool = True
    imag_residue: float = 0.0

    @property
    def cell(self) -> float:
        """Phase-space measure ``dk dW dR dT / (2 pi)^2``."""
        dk = self.k[1] - self.k[0]
        dw = self.omega[1] - self.omega[0]
        dr = self.R[1] - self.R[0]
        dt = self.T[1] - self.T[0]
        return float(dk * dw * dr * dt / (2.0 * math.pi) ** 2)

    def axes(self) -> dict[str, np.ndarray]:
        return {"k": self.k, "omega": self.omega, "R": self.R, "T": self.T}

    def t_variation(self) -> float:
        """Largest spread of ``g_w`` along the centre-time axis."""
        return float(np.max(np.ptp(self.g_w, axis=3)))


@dataclass(frozen=True)
class NegativityReport:
    min_value: float
    argmin: dict
    negative_fraction: float
    negative_mass: float
    tolerance: float

    @property
    def is_negative(self) -> bool:
        return self.min_value < -self.tolerance


# --------------------------------------------------------------------------
# oscillator states
# --------------------------------------------------------------------------


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Oscillator eigenfunctions ``phi_0 .. phi_{n_max}`` at ``x``, shape ``(n_max+1, len(x))``.

    Uses the three-term recurrence
    ``phi_{k+1} = sqrt(2/(k+1)) x phi_k - sqrt(k/(k+1)) phi_{k-1}``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, n_max):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


@dataclass(frozen=True)
class Fock:
    n: int


@dataclass(frozen=True)
class Gaussian:
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0


@dataclass(frozen=True)
class Superposition:
    """Coherent sum ``sum_i c_i |state_i>`` of pure specs; amplitudes are renormalized."""

    terms: Sequence[tuple[complex, Union[Fock, Gaussian]]]


@dataclass(frozen=True)
class Mixture:
    """Incoherent sum ``sum_i w_i rho_i``; weights are renormalized."""

    terms: Sequence[tuple[float, object]] = field(default_factory=tuple)


def _pure_wavefunction(x: np.ndarray, spec) -> np.ndarray:
    if isinstance(spec, Fock):
        if spec.n < 0:
            raise ValueError("Fock index must be nonnegative")
        return hermite_functions(spec.n, x)[spec.n].astype(complex)
    if isinstance(spec, Gaussian):
        if not spec.width > 0:
            raise ValueError("Gaussian width must be positive")
        s = spec.width
        psi = (math.pi * s * s) ** -0.25 * np.exp(-((x - spec.center) ** 2) / (2 * s * s))
        return psi * np.exp(1j * spec.momentum * x)
    if isinstance(spec, Superposition):
        amps = np.array([complex(c) for c, _ in spec.terms])
        states = [s for _, s in spec.terms]
        if not states:
            raise ValueError("empty superposition")
        # Gram matrix of the analytic states fixes the norm of the sum
        vecs = np.array([_pure_wavefunction(x, s) for s in states])
        dx = x[1] - x[0]
        gram = vecs.conj() @ vecs.T * dx
        norm2 = float(np.real(amps.conj() @ gram @ amps))
        if not norm2 > 1e-14:
            raise ValueError("superposition is not normalizable")
        return (amps @ vecs) / math.sqrt(norm2)
    raise TypeError(f"not a pure state spec: {spec!r}")


def _density(x: np.ndarray, spec) -> np.ndarray:
    if isinstance(spec, Mixture):
        weights = np.array([float(w) for w, _ in spec.terms])
        if weights.size == 0 or np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("mixture weights must be nonnegative with positive sum")
        weights = weights / weights.sum()
        return sum(w * _density(x, s) for w, s in zip(weights, (s for _, s in spec.terms)))
    psi = _pure_wavefunction(x, spec)
    return np.outer(psi, psi.conj())


def oscillator_state_factory(grid: Grid1D, spec, edge_tol: float = 1e-10) -> DensityMatrix1P:
    """Build a :class:`DensityMatrix1P` from a Fock/Gaussian/Superposition/Mixture spec.

    The matrix is rescaled to unit grid trace.  States that have not decayed
    below ``edge_tol`` at the grid boundary are rejected, since the Wigner
    transform drops out-of-range offsets.
    """
    x = grid.points
    rho = _density(x, spec)
    tr = float(np.real(np.trace(rho))) * grid.dx
    if not tr > 1e-12:
        raise ValueError("state is not normalizable on this grid")
    rho = rho / tr
    edge = max(np.max(np.abs(rho[0])), np.max(np.abs(rho[-1])))
    if edge > edge_tol:
        raise ValueError(f"state does not decay at the grid edge (|rho| = {edge:.3e} > {edge_tol:g})")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix1P(grid, rho)


def toy_g_lesser(grid: Grid1D, times: TimeGrid, occupation) -> LesserGreenFunction:
    """Lesser function of one particle in ``sum_m c_m phi_m`` evolving under ``H = p^2/2 + x^2/2``.

    ``occupation`` is a list of ``(orbital index, amplitude)``.  Orbital
    energies are ``m + 1/2``, so ``-i G^<`` is ``4 pi``-periodic in both times;
    use a time window of length ``4 pi`` for :func:`gwd_transform` with the
    default periodic time axis.
    """
    idx = [int(m) for m, _ in occupation]
    amps = np.array([complex(c) for _, c in occupation])
    if abs(float(np.sum(np.abs(amps) ** 2)) - 1.0) > 1e-10:
        raise ValueError("occupation amplitudes must be normalized")
    phi = hermite_functions(max(idx), grid.points)[idx]
    energies = np.array(idx) + 0.5
    t = times.points
    # psi[i, a] = sum_m c_m phi_m(x_i) exp(-i E_m t_a)
    psi = np.einsum("m,mi,ma->ia", amps, phi, np.exp(-1j * np.outer(energies, t)))
    g = np.multiply.outer(psi, psi.conj())
    return LesserGreenFunction(grid, times, g)


# --------------------------------------------------------------------------
# transforms
# --------------------------------------------------------------------------


def _offset_indices(n: int, periodic: bool):
    """Index tables for the integer-offset rule.

    Returns ``plus[j, q] = j + m``, ``minus[j, q] = j - m`` and a validity mask,
    where ``m`` is the signed offset stored at FFT position ``q``.
    """
    q = np.arange(n)
    m = np.where(q < n // 2, q, q - n)
    j = np.arange(n)[:, None]
    plus = j + m[None, :]
    minus = j - m[None, :]
    if periodic:
        valid = np.ones((n, n), dtype=bool)
        return plus % n, minus % n, valid
    valid = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n)
    return np.where(valid, plus, 0), np.where(valid, minus, 0), valid


def _frequencies(n: int, step: float) -> np.ndarray:
    """Conjugate grid ``pi k / (n step)`` for ``k = -n/2 .. n/2 - 1``."""
    return math.pi * np.arange(-n // 2, n // 2) / (n * step)


def wigner_transform(rho: DensityMatrix1P) -> WignerFunction:
    """Discrete Wigner function ``W[j, k] = (dx/pi) sum_m exp(-2i p_k m dx) rho[j+m, j-m]``."""
    if not isinstance(rho, DensityMatrix1P):
        raise TypeError("wigner_transform expects a DensityMatrix1P")
    n, dx = rho.grid.n, rho.grid.dx
    plus, minus, valid = _offset_indices(n, periodic=False)
    f = np.where(valid, rho.rho[plus, minus], 0.0)
    w = np.fft.fftshift(np.fft.fft(f, axis=1), axes=1) * (dx / math.pi)
    residue = float(np.max(np.abs(w.imag)))
    return WignerFunction(rho.grid, _frequencies(n, dx), np.ascontiguousarray(w.real), residue)


def gwd_transform(g: LesserGreenFunction, periodic_time: bool = True) -> GWD:
    """Generalized Wigner distribution of a lesser Green function.

    Output axes are ``(k, omega, R, T)``.  With ``periodic_time`` the time
    offsets wrap around the window, which is exact when ``g`` is periodic over
    the window (as for :func:`toy_g_lesser` on a ``4 pi`` window) and keeps a
    stationary input exactly independent of ``T``.
    """
    n, nt = g.grid.n, g.times.n
    if not (is_power_of_two(n) and is_power_of_two(nt)):
        raise ValueError("grid axes must be powers of two")
    dx, dt = g.grid.dx, g.times.dt
    xp, xm, xvalid = _offset_indices(n, periodic=False)
    tp, tm, tvalid = _offset_indices(nt, periodic=periodic_time)
    out = np.empty((n, nt, n, nt))
    residue = 0.0
    scale = 4.0 * dx * dt
    for c in range(nt):
        f = g.g[xp[:, :, None], tp[c][None, None, :], xm[:, :, None], tm[c][None, None, :]]
        mask = xvalid[:, :, None] & tvalid[c][None, None, :]
        f = np.where(mask, f, 0.0)
        # exp(-i k r) along the space offset, exp(+i W tau) along the time offset
        f = np.fft.fft(f, axis=1)
        f = np.fft.ifft(f, axis=2) * nt
        f = np.fft.fftshift(f, axes=(1, 2)) * scale
        residue = max(residue, float(np.max(np.abs(f.imag))))
        out[:, :, :, c] = f.real.transpose(1, 2, 0)
    return GWD(
        k=_frequencies(n, dx),
        omega=_frequencies(nt, dt),
        R=g.grid.points,
        T=g.times.points,
        g_w=out,
        periodic_time=periodic_time,
        imag_residue=residue,
    )


def overlap_trace(a, b, eps: float = 1e-12, periodic_time: bool = True) -> tuple[float, float, float]:
    """Direct trace of ``a b`` versus the phase-space integral of their transforms.

    Returns ``(lhs, rhs, discrepancy)`` with ``discrepancy = |lhs - rhs| / max(|lhs|, eps)``.
    Both operands must be of the same kind on identical grids.
    """
    if isinstance(a, DensityMatrix1P) and isinstance(b, DensityMatrix1P):
        if a.grid != b.grid:
            raise ValueError("operands live on different grids")
        dx = a.grid.dx
        lhs = float(np.real(np.sum(a.rho * b.rho.T))) * dx * dx
        wa, wb = wigner_transform(a), wigner_transform(b)
        rhs = WIGNER_TRACE_CONSTANT * float(np.sum(wa.w * wb.w)) * wa.cell
    elif isinstance(a, LesserGreenFunction) and isinstance(b, LesserGreenFunction):
        if a.grid != b.grid or a.times != b.times:
            raise ValueError("operands live on different grids")
        size = a.grid.n * a.times.n
        am, bm = a.g.reshape(size, size), b.g.reshape(size, size)
        lhs = float(np.real(np.sum(am * bm.T))) * (a.grid.dx * a.times.dt) ** 2
        ga, gb = gwd_transform(a, periodic_time), gwd_transform(b, periodic_time)
        rhs = float(np.sum(ga.g_w * gb.g_w)) * ga.cell
        if periodic_time:
            rhs *= 0.5
    else:
        raise TypeError("overlap_trace needs two DensityMatrix1P or two LesserGreenFunction operands")
    disc = abs(lhs - rhs) / max(abs(lhs), eps)
    return lhs, rhs, disc


def negativity_report(w, tolerance: float = 1e-9) -> NegativityReport:
    """Locate and integrate the negative part of a Wigner function, GWD or bare array.

    Bare arrays are integrated with unit cell weight and report index
    coordinates.
    """
    if isinstance(w, WignerFunction):
        arr, axes, cell = w.w, w.axes(), w.cell
    elif isinstance(w, GWD):
        arr, axes, cell = w.g_w, w.axes(), w.cell
    else:
        arr = np.asarray(w, dtype=float)
        axes = {f"axis{i}": np.arange(s) for i, s in enumerate(arr.shape)}
        cell = 1.0
    if arr.size == 0:
        raise ValueError("empty array")
    flat = int(np.argmin(arr))
    idx = np.unravel_index(flat, arr.shape)
    min_value = float(arr.flat[flat])
    argmin = {name: float(grid[i]) for (name, grid), i in zip(axes.items(), idx)}
    below = arr < -tolerance
    neg_fraction = float(np.count_nonzero(below)) / arr.size
    neg_mass = float(np.sum(np.where(below, -arr, 0.0))) * cell
    return NegativityReport(min_value, argmin, neg_fraction, neg_mass, tolerance)
