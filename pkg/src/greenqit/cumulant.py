"""Densities rebuilt from a truncated cumulant expansion.

A cumulant vector ``kappa_1 .. kappa_n`` defines the characteristic function
``phi(t) = exp(sum_j kappa_j (it)^j / j!)``.  Its inverse Fourier transform is a
bona fide probability density only when the polynomial stops at degree two;
anything longer produces regions where ``p(x) < 0``.  This module evaluates
that inverse transform by FFT and measures the negative part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import Grid1D

__all__ = [
    "CumulantVector",
    "TruncatedDensity",
    "ScanRow",
    "characteristic_function",
    "default_x_grid",
    "tail_extent",
    "truncated_density",
    "marcinkiewicz_scan",
    "relative_strength",
]

TAIL_TOL = 1e-12


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants ``kappa[0] = kappa_1, kappa[1] = kappa_2, ...``.

    Only vectors whose characteristic function is absolutely integrable are
    accepted.  ``|phi(t)|`` is governed by the even-order terms, and the
    highest nonzero even coefficient ``kappa_{2m}`` must satisfy
    ``(-1)^m kappa_{2m} < 0`` (so ``kappa_2 > 0``, ``kappa_4 < 0``,
    ``kappa_6 > 0``, ...).  Divergent cases still obey the positivity theorem
    but cannot be shown by quadrature, so they are refused here.
    """

    kappa: tuple

    def __post_init__(self):
        k = tuple(float(v) for v in np.atleast_1d(np.asarray(self.kappa, dtype=float)))
        object.__setattr__(self, "kappa", k)
        if len(k) == 0:
            raise ValueError("cumulant vector is empty")
        if not all(math.isfinite(v) for v in k):
            raise ValueError("cumulants must be finite")
        if len(k) < 2:
            raise ValueError(
                "kappa_2 is missing: |phi(t)| = 1 is not integrable, so the density cannot be "
                "reconstructed by quadrature"
            )
        if not k[1] > 0:
            raise ValueError(f"kappa_2 = {k[1]!r} must be positive for |phi(t)| to be integrable")
        top = max(j for j in range(2, len(k) + 1, 2) if k[j - 1] != 0.0)
        sign = (-1) ** (top // 2)
        if sign * k[top - 1] >= 0:
            want = "negative" if top % 4 == 0 else "positive"
            raise ValueError(
                f"kappa_{top} = {k[top - 1]!r} must be {want}: the highest even-order term decides "
                f"whether |phi(t)| decays, and with this sign it grows like exp(|kappa_{top}| t^{top}/{top}!); "
                "such a density cannot be demonstrated by quadrature"
            )

    @property
    def degree(self) -> int:
        """Highest order with a nonzero cumulant."""
        nz = [j + 1 for j, v in enumerate(self.kappa) if v != 0.0]
        return max(nz) if nz else 0

    @property
    def mean(self) -> float:
        return self.kappa[0]

    @property
    def variance(self) -> float:
        return self.kappa[1]

    def reflected(self) -> "CumulantVector":
        """Cumulants of ``2 kappa_1 - X``: odd orders above one change sign."""
        k = list(self.kappa)
        for j in range(3, len(k) + 1, 2):
            k[j - 1] = -k[j - 1]
        return CumulantVector(tuple(k))


@dataclass(frozen=True)
class TruncatedDensity:
    x_grid: Grid1D
    p: np.ndarray
    negative_mass: float
    total_mass: float
    imag_residue: float
    t_extent: float

    @property
    def x(self) -> np.ndarray:
        return self.x_grid.points

    @property
    def min_value(self) -> float:
        return float(np.min(self.p))


@dataclass(frozen=True)
class ScanRow:
    kappa3: float
    min_p: float
    negative_mass: float


def _as_vector(kappa) -> CumulantVector:
    return kappa if isinstance(kappa, CumulantVector) else CumulantVector(tuple(kappa))


def characteristic_function(kappa, t) -> np.ndarray:
    """``phi(t) = exp(sum_j kappa_j (i t)^j / j!)`` evaluated pointwise."""
    kv = _as_vector(kappa)
    t = np.asarray(t, dtype=float)
    it = 1j * t
    logphi = np.zeros(t.shape, dtype=complex)
    power = np.ones(t.shape, dtype=complex)
    for j, kj in enumerate(kv.kappa, start=1):
        power = power * it
        if kj != 0.0:
            logphi += kj * power / math.factorial(j)
    return np.exp(logphi)


def relative_strength(kappa) -> float:
    """``max_{j>2} |kappa_j| / kappa_2^{j/2}``; zero for a Gaussian."""
    kv = _as_vector(kappa)
    k2 = kv.kappa[1]
    vals = [abs(kj) / k2 ** (j / 2) for j, kj in enumerate(kv.kappa, start=1) if j > 2]
    return max(vals, default=0.0)


def default_x_grid(kappa, n: int = 1024) -> Grid1D:
    """``[kappa_1 - 12 sqrt(kappa_2), kappa_1 + 12 sqrt(kappa_2))`` with ``n`` points."""
    kv = _as_vector(kappa)
    half = 12.0 * math.sqrt(kv.kappa[1])
    return Grid1D(kv.mean - half, kv.mean + half, n)


def tail_extent(kappa, tol: float = TAIL_TOL, t_max: float = 1e4) -> float:
    """Smallest ``t`` beyond which ``|phi|`` stays below ``tol``.

    ``|phi|`` depends only on the even cumulants; it is scanned on a fine grid
    out to the point where the leading even term dominates.
    """
    kv = _as_vector(kappa)
    ts = np.linspace(0.0, 1.0, 2001)
    scale = 1.0
    while scale < t_max:
        mag = np.abs(characteristic_function(kv, ts * scale))
        above = np.nonzero(mag >= tol)[0]
        if above[-1] < ts.size - 100:
            return float(ts[above[-1] + 1] * scale)
        scale *= 2.0
    raise ValueError(f"|phi(t)| does not fall below {tol:g} before t = {t_max:g}")


def truncated_density(kappa, x_grid: Grid1D | None = None, t_extent: float | None = None) -> TruncatedDensity:
    """Invert ``phi`` on ``x_grid``: ``p(x) = (1/2pi) int phi(t) exp(-itx) dt``.

    The ``t`` samples are the FFT partners of the ``x`` grid,
    ``t_k = 2 pi k / (n dx)``, spanning ``|t| <= pi / dx``.  ``t_extent`` is the
    point beyond which ``phi`` is negligible; it defaults to the adaptive tail
    search of :func:`tail_extent`.  Raises ``ValueError`` when
    ``|phi(+-t_extent)|`` exceeds ``1e-12`` or when the grid cannot reach
    ``t_extent``.
    """
    kv = _as_vector(kappa)
    if x_grid is None:
        x_grid = default_x_grid(kv)
    if t_extent is None:
        t_extent = tail_extent(kv)
    n, dx = x_grid.n, x_grid.dx
    tail = float(np.max(np.abs(characteristic_function(kv, [-t_extent, t_extent]))))
    if tail >= TAIL_TOL:
        raise ValueError(f"tail condition violated: |phi(+-{t_extent:g})| = {tail:.3e} >= {TAIL_TOL:g}")
    t_nyq = math.pi / dx
    if t_extent > t_nyq:
        raise ValueError(
            f"x grid too coarse: it resolves |t| <= {t_nyq:.4g} but phi is non-negligible up to {t_extent:.4g}"
        )
    dt = 2.0 * math.pi / (n * dx)
    k = np.fft.fftfreq(n, d=1.0 / n)
    t = k * dt
    phi = characteristic_function(kv, t)
    # p(x_j) = (dt/2pi) sum_k phi(t_k) exp(-i t_k x_min) exp(-2 pi i k j / n)
    spec = phi * np.exp(-1j * t * x_grid.x_min)
    p_c = np.fft.fft(spec) * (dt / (2.0 * math.pi))
    residue = float(np.max(np.abs(p_c.imag)))
    p = p_c.real
    neg = float(np.sum(np.maximum(0.0, -p)) * dx)
    total = float(np.sum(p) * dx)
    return TruncatedDensity(x_grid, p, neg, total, residue, float(t_extent))


def marcinkiewicz_scan(kappa3_values, base=(0.0, 1.0), x_grid: Grid1D | None = None,
                       t_extent: float | None = None) -> list[ScanRow]:
    """Negative mass of ``(kappa_1, kappa_2, kappa_3)`` densities, one row per ``kappa_3``.

    ``base`` must be a degree-two vector.  Every row uses the same ``x`` grid
    (default: that of ``base``) so rows are directly comparable.
    """
    bv = _as_vector(base)
    if bv.degree > 2:
        raise ValueError("scan base must have degree <= 2")
    k1, k2 = bv.kappa[0], bv.kappa[1]
    if x_grid is None:
        x_grid = default_x_grid(bv)
    rows = []
    for k3 in sorted(float(v) for v in kappa3_values):
        d = truncated_density((k1, k2, k3), x_grid, t_extent)
        rows.append(ScanRow(k3, d.min_value, d.negative_mass))
    return rows
