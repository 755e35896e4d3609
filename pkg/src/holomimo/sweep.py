"""Parameter-sweep drivers: optimal apertures, fraction-of-maximum apertures,
receive-separation studies, and finite-vs-asymptotic eigenvalue comparisons."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .capacity import RateReport, SnrConfig, spectral_efficiency
from .channel import finite_gramian
from .geometry import ArraySpec, PolarPlacement, RxSpec, polar_to_cartesian, upa_geometry
from .holographic import ula_gramian, upa_gramian_2x3, upa_gramian_3x3

__all__ = [
    "SweepRow",
    "SweepResult",
    "optimal_aperture_ula",
    "aperture_for_fraction",
    "upa_aperture_sweep",
    "rx_separation_sweep",
    "eigenvalue_size_study",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepRow:
    "One grid point of a sweep."

    values: tuple
    se: float
    effective_dof: float
    n_active: int
    eigenvalues: tuple


@dataclass
class SweepResult:
    "Sweep rows plus the argmax summary and fraction-of-maximum targets."

    variable: str
    columns: tuple
    rows: list
    argmax_index: int
    lambda_star: float | tuple
    c_star: float
    fraction_targets: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def se_values(self) -> np.ndarray:
        return np.array([r.se for r in self.rows])


def _snr0(snr) -> float:
    return snr.snr0 if isinstance(snr, SnrConfig) else float(snr)


def _row(values, report: RateReport) -> SweepRow:
    return SweepRow(values=tuple(np.atleast_1d(values).tolist()),
                    se=report.se, effective_dof=report.effective_dof,
                    n_active=report.allocation.active_count,
                    eigenvalues=tuple(report.eigenvalues.tolist()))


def _golden_max(f, a: float, b: float, tol: float) -> tuple[float, float]:
    "Golden-section maximizer of a unimodal f on [a, b]."
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _ula_se(aperture: float, t_pol, r_pol, theta, d, snr0) -> RateReport:
    rho = aperture / (2.0 * d)
    return spectral_efficiency(ula_gramian(t_pol, r_pol, rho, theta, d), snr0)


def _upa_se(aperture: float, t_pol, r_pol, theta, d, snr0,
            aspect: float) -> RateReport:
    # aperture = 2*sqrt(lx^2 + ly^2) with lx = aspect * ly
    l_y = aperture / (2.0 * np.sqrt(1.0 + aspect**2))
    l_x = aspect * l_y
    rx = polar_to_cartesian(PolarPlacement(distance=d, elevation=theta))
    g = upa_geometry(l_x, l_y, rx)
    w = upa_gramian_3x3(g, d) if t_pol == 3 else upa_gramian_2x3(g, d)
    return spectral_efficiency(w.w_bar[:r_pol, :r_pol], snr0)


def _aperture_sweep(se_fn, grid, fractions, d, variable, meta) -> SweepResult:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be nonempty and strictly increasing")
    reports = [se_fn(lam) for lam in grid]
    rows = [_row(lam, rep) for lam, rep in zip(grid, reports)]
    ses = np.array([r.se for r in rows])
    i = int(np.argmax(ses))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        lam_star, c_star = _golden_max(lambda lam: se_fn(lam).se, lo, hi,
                                       tol=1e-4 * d)
        if c_star < ses[i]:
            lam_star, c_star = grid[i], float(ses[i])
    else:
        lam_star, c_star = grid[i], float(ses[i])
    targets = {}
    for f in fractions:
        if not 0 < f <= 1:
            raise ValueError("fractions must lie in (0, 1]")
        hit = np.nonzero(ses >= f * c_star)[0]
        targets[f] = float(grid[hit[0]]) if hit.size else float(lam_star)
    return SweepResult(variable=variable, columns=("aperture_m",), rows=rows,
                       argmax_index=i, lambda_star=float(lam_star),
                       c_star=float(c_star), fraction_targets=targets,
                       meta=meta)


def optimal_aperture_ula(t_pol: int, r_pol: int, theta: float, d: float,
                         snr, grid=None, fractions=()) -> SweepResult:
    """Sweep spectral efficiency over the transmit-line aperture (holographic
    closed forms) and refine the argmax by golden section to 1e-4*d."""
    snr0 = _snr0(snr)
    if grid is None:
        step = 5e-4 * d
        grid = np.arange(step, 4.0 * d + step / 2, step)
    meta = {"t_pol": t_pol, "r_pol": r_pol, "theta": theta, "d": d,
            "snr0": snr0, "config": "ULA"}
    return _aperture_sweep(lambda lam: _ula_se(lam, t_pol, r_pol, theta, d, snr0),
                           grid, fractions, d, "aperture", meta)


def aperture_for_fraction(fraction: float, t_pol: int, r_pol: int,
                          theta: float, d: float, snr, step: float = 0.002,
                          grid=None) -> float:
    "Smallest aperture on a ``step``-resolution grid attaining fraction*C*."
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    snr0 = _snr0(snr)
    coarse = optimal_aperture_ula(t_pol, r_pol, theta, d, snr0)
    if fraction == 1.0:
        return coarse.lambda_star
    if grid is None:
        grid = np.arange(step, coarse.lambda_star + step, step)
    target = fraction * coarse.c_star
    for lam in grid:
        if _ula_se(lam, t_pol, r_pol, theta, d, snr0).se >= target:
            return float(lam)
    return coarse.lambda_star


def upa_aperture_sweep(t_pol: int, r_pol: int, theta: float, d: float,
                       snr, aspect: float = 1.0, grid=None,
                       fractions=()) -> SweepResult:
    """Sweep over the panel aperture 2*sqrt(lx^2+ly^2) at fixed aspect ratio
    lx/ly (default square), using the panel closed forms."""
    if aspect <= 0:
        raise ValueError("aspect must be positive")
    snr0 = _snr0(snr)
    if grid is None:
        step = 5e-4 * d
        grid = np.arange(step, 4.0 * d + step / 2, step)
    meta = {"t_pol": t_pol, "r_pol": r_pol, "theta": theta, "d": d,
            "snr0": snr0, "aspect": aspect, "config": "UPA"}
    return _aperture_sweep(
        lambda lam: _upa_se(lam, t_pol, r_pol, theta, d, snr0, aspect),
        grid, fractions, d, "aperture", meta)


def rx_separation_sweep(t_pol: int, r_pol: int, n_r: int, delta_r_grid,
                        aperture_grid, d: float, snr, m_half: int,
                        lam: float, theta: float = 0.0, axis: str = "y",
                        frontier_fractions=(1.0, 0.99, 0.95)) -> SweepResult:
    """Finite-array spectral efficiency over a (aperture, rx separation) grid.

    The transmitter is a (2*m_half+1)-element line along y whose spacing
    tracks the aperture; receive antennas form a line of ``n_r`` elements
    with separation given in wavelengths.  The frontier reports, per
    fraction of the global maximum, the smallest aperture at each separation
    achieving it.
    """
    snr0 = _snr0(snr)
    delta_r_grid = np.asarray(delta_r_grid, dtype=float)
    aperture_grid = np.asarray(aperture_grid, dtype=float)
    if np.any(np.diff(delta_r_grid) <= 0) or np.any(np.diff(aperture_grid) <= 0):
        raise ValueError("grids must be strictly increasing")
    if m_half < 1:
        raise ValueError("m_half must be >= 1 to realize a nonzero aperture")
    center = polar_to_cartesian(PolarPlacement(distance=d, elevation=theta))
    rows = []
    ses = np.empty((aperture_grid.size, delta_r_grid.size))
    for ia, aperture in enumerate(aperture_grid):
        a = ArraySpec(delta_t=aperture / (2 * m_half), m_half=m_half,
                      k_half=0, t_pol=t_pol)
        for ir, dr in enumerate(delta_r_grid):
            rx = RxSpec.line(center, n_r=n_r, delta_r=dr * lam,
                             r_pol=r_pol, axis=axis)
            w = finite_gramian(a, rx, d_ref=d, lam=lam)
            rep = spectral_efficiency(w, snr0)
            rows.append(_row((aperture, dr), rep))
            ses[ia, ir] = rep.se
    i_flat = int(np.argmax(ses))
    ia, ir = np.unravel_index(i_flat, ses.shape)
    c_star = float(ses[ia, ir])
    frontier = {}
    for f in frontier_fractions:
        pts = []
        for ir2, dr in enumerate(delta_r_grid):
            ok = np.nonzero(ses[:, ir2] >= f * c_star)[0]
            if ok.size:
                pts.append((float(aperture_grid[ok[0]]), float(dr)))
        frontier[f] = pts
    meta = {"t_pol": t_pol, "r_pol": r_pol, "n_r": n_r, "d": d, "snr0": snr0,
            "m_half": m_half, "lam": lam, "theta": theta, "axis": axis,
            "frontier": frontier}
    return SweepResult(variable="joint_aperture_rx_sep",
                       columns=("aperture_m", "delta_r_lam"), rows=rows,
                       argmax_index=i_flat,
                       lambda_star=(float(aperture_grid[ia]),
                                    float(delta_r_grid[ir])),
                       c_star=c_star, fraction_targets={}, meta=meta)


def eigenvalue_size_study(l_x: float, l_y_grid, d: float, theta: float,
                          delta_t: float, lam: float | None = None) -> list[dict]:
    """Finite-spacing vs holographic eigenvalues as the panel height grows.

    Element spacing defaults to lam/2 when ``lam`` is given and ``delta_t``
    is None-like; panel half-sizes are rounded to whole element counts.
    Returns one record per l_y with both eigenvalue triples and their
    relative gaps.
    """
    if delta_t is None:
        if lam is None:
            raise ValueError("need delta_t or lam")
        delta_t = lam / 2
    rx_pos = polar_to_cartesian(PolarPlacement(distance=d, elevation=theta))
    records = []
    for l_y in np.asarray(l_y_grid, dtype=float):
        a = ArraySpec(delta_t=delta_t, m_half=int(round(l_y / delta_t)),
                      k_half=int(round(l_x / delta_t)), t_pol=3)
        fin = finite_gramian(a, RxSpec.single(rx_pos, r_pol=3), d_ref=d)
        asym = upa_gramian_3x3(upa_geometry(l_x, l_y, rx_pos), d)
        ef = fin.eigenvalues
        ea = asym.eigenvalues
        gap = np.abs(ef - ea) / np.where(ea > 0, ea, 1.0)
        records.append({
            "l_y": float(l_y),
            "n_elements": a.n_elements,
            "eig_finite": tuple(ef.tolist()),
            "eig_asymptotic": tuple(ea.tolist()),
            "rel_gap": tuple(gap.tolist()),
        })
    return records
