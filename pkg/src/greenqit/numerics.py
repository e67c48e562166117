"""Shared numerical kernels: grids, FFT, Hermitian eigensolver, seeded states.

All randomness goes through :func:`rng`, which wraps numpy's PCG64 bit
generator seeded through a :class:`numpy.random.SeedSequence`.  PCG64 is a
documented 128-bit-state / 64-bit-output permuted congruential generator and
``SeedSequence.spawn`` provides the splittable seed contract.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid1D",
    "TimeGrid",
    "is_power_of_two",
    "fft_1d",
    "hermitian_eig",
    "rng",
    "spawn_seeds",
    "random_state",
    "purity",
    "gauss_hermite",
]

HERMITIAN_TOL = 1e-10


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic-style grid ``x_i = x_min + i*dx``, ``i = 0..n-1``.

    ``x_max`` itself is not a sample point, so a grid on ``[-L, L)`` with even
    ``n`` contains the origin at index ``n // 2``.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if self.n < 8 or not is_power_of_two(self.n):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n * factor)


@dataclass(frozen=True)
class TimeGrid(Grid1D):
    """Uniform time grid; same sampling rule as :class:`Grid1D`."""

    @property
    def dt(self) -> float:
        return self.dx


def fft_1d(data, direction: str = "forward") -> np.ndarray:
    """Radix-2 DFT.

    ``forward`` is the unnormalized sum ``X_k = sum_m x_m exp(-2 pi i k m / n)``;
    ``inverse`` carries the ``1/n`` factor so that ``inverse(forward(x)) == x``.
    """
    x = np.asarray(data, dtype=complex)
    if x.ndim != 1:
        raise ValueError("fft_1d expects a one-dimensional array")
    if not is_power_of_two(x.size):
        raise ValueError(f"length {x.size} is not a power of two")
    if direction == "forward":
        return np.fft.fft(x)
    if direction == "inverse":
        return np.fft.ifft(x)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    Raises ``ValueError`` when ``m`` deviates from its adjoint by more than
    ``1e-10`` in any entry.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (max |m - m^H| = {dev:.3e})")
    h = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def rng(seed: int) -> np.random.Generator:
    """Deterministic PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)))


def spawn_seeds(seed: int, count: int) -> list[int]:
    """Derive ``count`` independent 64-bit child seeds from ``seed``."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in ss.spawn(count)]


def _complex_normal(gen: np.random.Generator, shape) -> np.ndarray:
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def random_state(seed: int, dim: int, kind: str = "pure") -> np.ndarray:
    """Random quantum state of dimension ``dim``.

    ``pure`` returns a Haar-random unit vector as a ``(dim, 1)`` array.
    ``mixed`` returns ``G G^H / Tr(G G^H)`` for a square complex Ginibre
    matrix ``G`` (Hilbert-Schmidt measure).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    gen = rng(seed)
    if kind == "pure":
        v = _complex_normal(gen, dim)
        return (v / np.linalg.norm(v)).reshape(dim, 1)
    if kind == "mixed":
        g = _complex_normal(gen, (dim, dim))
        rho = g @ g.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        return rho / np.trace(rho).real
    raise ValueError(f"kind must be 'pure' or 'mixed', got {kind!r}")


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int f(x) exp(-x^2) dx``."""
    return np.polynomial.hermite.hermgauss(n)
