"""Waterfilling capacity of Gramians and finite channels: power allocation,
spectral efficiency, stream-count thresholds, and degrees-of-freedom measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SnrConfig",
    "PowerAllocation",
    "RateReport",
    "eig_sorted",
    "waterfill",
    "snr_thresholds",
    "spectral_efficiency",
    "capacity_finite",
    "effective_dof",
]

# eigenvalues below this fraction of the trace are structural zeros
# (rank-deficient projector geometry), not channel modes
_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class SnrConfig:
    """Reference SNR at the receiver.

    ``direct`` takes the quoted figure as the reference SNR itself (the
    convention that reproduces the published optimal-aperture tables);
    ``per_eq6`` derives it from the constituent link-budget quantities as
    (p_bar / (sigma2 * t_pol)) * |xi/lam|^2 / d^2.
    """

    snr0: float
    convention: str = "direct"

    def __post_init__(self):
        if self.snr0 <= 0:
            raise ValueError("snr0 must be positive")
        if self.convention not in ("direct", "per_eq6"):
            raise ValueError("convention must be 'direct' or 'per_eq6'")

    @classmethod
    def from_db(cls, value_db: float, convention: str = "direct",
                t_pol: int = 3) -> "SnrConfig":
        snr0 = 10.0 ** (value_db / 10.0)
        if convention == "per_eq6":
            snr0 /= t_pol
        return cls(snr0=snr0, convention=convention)

    @classmethod
    def from_link_budget(cls, p_bar: float, sigma2: float, t_pol: int,
                         xi: complex, lam: float, d: float) -> "SnrConfig":
        snr0 = p_bar / (sigma2 * t_pol) * abs(xi / lam) ** 2 / d**2
        return cls(snr0=snr0, convention="per_eq6")


@dataclass(frozen=True)
class PowerAllocation:
    "Waterfilling solution: normalized powers, water level, active count."

    powers: np.ndarray
    water_level: float
    active_count: int

    @property
    def total(self) -> float:
        return float(np.sum(self.powers))


@dataclass(frozen=True)
class RateReport:
    """Spectral efficiency with its supporting quantities.

    ``effective_dof`` is the finite-SNR quotient C / log2(snr0); ``limit_dof``
    counts the nonzero eigenvalues (the high-SNR DoF).  ``snr_th1``/``snr_th2``
    are the reference-SNR levels activating the second and third stream.
    """

    se: float
    eigenvalues: np.ndarray
    allocation: PowerAllocation
    effective_dof: float
    limit_dof: int
    snr_th1: float | None = None
    snr_th2: float | None = None


def eig_sorted(w) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, descending, with negatives within
    the zero tolerance clamped to exactly zero."""
    w = np.asarray(w)
    scale = max(float(np.abs(np.trace(w))), 1e-300)
    if np.max(np.abs(w - w.conj().T)) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian")
    e = np.sort(np.linalg.eigvalsh(w))[::-1].astype(float)
    e[np.abs(e) <= _ZERO_TOL * scale] = 0.0
    if e.min() < 0:
        raise ValueError("matrix is not positive semidefinite")
    return e


def waterfill(eigs, snr0: float) -> PowerAllocation:
    """Allocate a total budget ``snr0`` over channel eigenvalues (descending).

    Powers follow p_i = [1/theta - 1/rho_i]+ with theta chosen so the powers
    sum to the budget; modes whose eigenvalue ties the water level exactly are
    counted inactive.
    """
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0 or np.any(np.diff(eigs) > 0):
        raise ValueError("eigenvalues must be nonempty and sorted descending")
    if snr0 <= 0:
        raise ValueError("snr0 must be positive")
    positive = eigs[eigs > 0]
    if positive.size == 0:
        raise ValueError("no usable channel: all eigenvalues are zero")
    inv = 1.0 / positive
    for n in range(positive.size, 0, -1):
        inv_theta = (snr0 + np.sum(inv[:n])) / n
        if inv_theta > inv[n - 1]:
            powers = np.zeros(eigs.size)
            powers[:n] = inv_theta - inv[:n]
            return PowerAllocation(powers=powers, water_level=1.0 / inv_theta,
                                   active_count=n)
    raise AssertionError("waterfilling failed to find an active set")


def snr_thresholds(eigs) -> tuple[float | None, float | None]:
    """Reference-SNR levels at which the second and third stream activate.

    Only defined when at least two (resp. three) eigenvalues exist; infinite
    when the corresponding eigenvalue is zero.
    """
    eigs = np.asarray(eigs, dtype=float)
    th1 = th2 = None
    if eigs.size >= 2:
        th1 = (1.0 / eigs[1] - 1.0 / eigs[0]) if eigs[1] > 0 else np.inf
    if eigs.size >= 3:
        th2 = (2.0 / eigs[2] - 1.0 / eigs[0] - 1.0 / eigs[1]) \
            if eigs[2] > 0 else np.inf
    return th1, th2


def _rate_report(eigs: np.ndarray, snr0: float) -> RateReport:
    alloc = waterfill(eigs, snr0)
    active = alloc.powers > 0
    se = float(np.sum(np.log2(1.0 + eigs[active] * alloc.powers[active])))
    th1, th2 = snr_thresholds(eigs)
    eff = se / np.log2(snr0) if snr0 > 1 else float("nan")
    return RateReport(se=se, eigenvalues=eigs, allocation=alloc,
                      effective_dof=eff, limit_dof=int(np.sum(eigs > 0)),
                      snr_th1=th1, snr_th2=th2)


def spectral_efficiency(w, snr: SnrConfig | float) -> RateReport:
    """Waterfilling spectral efficiency of a normalized Gramian at reference
    SNR.  ``w`` may be a matrix or anything exposing ``w_bar``/``w``."""
    snr0 = snr.snr0 if isinstance(snr, SnrConfig) else float(snr)
    mat = getattr(w, "w_bar", None)
    if mat is None:
        mat = getattr(w, "w", w)
    return _rate_report(eig_sorted(mat), snr0)


def capacity_finite(h, p_total: float, sigma2: float) -> RateReport:
    """Capacity of a finite stacked channel with total power ``p_total`` and
    noise power ``sigma2``, waterfilling over the squared singular values."""
    entries = getattr(h, "entries", h)
    if p_total <= 0 or sigma2 <= 0:
        raise ValueError("p_total and sigma2 must be positive")
    gam = np.linalg.svd(entries, compute_uv=False) ** 2
    if gam.size == 0 or gam.max() <= 0:
        raise ValueError("no usable channel: zero channel matrix")
    gam[gam <= _ZERO_TOL * gam.sum()] = 0.0
    # identical waterfilling problem over gam/sigma2 with budget p_total
    return _rate_report(gam / sigma2, p_total)


def effective_dof(rate_fn, snr: float) -> float:
    "Finite-SNR degrees of freedom: the quotient C(snr) / log2(snr)."
    if snr <= 1:
        raise ValueError("snr must exceed 1")
    return rate_fn(snr) / np.log2(snr)
