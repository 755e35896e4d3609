"""Closed-form asymptotic Gramians of the continuous-aperture (holographic)
limit, their Riemann-sum approximants, and the quadrature oracles used to
validate them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import UpaGeometry, upa_geometry
from .quadrature import adaptive_quad, adaptive_quad_2d

__all__ = [
    "PsiSet",
    "AsymptoticGramian",
    "Phi2Value",
    "psi_set",
    "psi_profile",
    "partial_sum_sk",
    "ula_gramian",
    "ula_gramian_offaxis",
    "phi2",
    "upa_gramian_3x3",
    "upa_gramian_2x3",
    "upa_single_integral_2x3",
    "quadrature_oracle",
]


@dataclass(frozen=True)
class PsiSet:
    """The five geometric integrals of the linear-aperture limit.

    psi_k carries units 1/D^k; D^k*psi_k depends only on (rho, theta) with
    rho = L/D the aperture-to-distance ratio.
    """

    psi2: float
    psi3: float
    psi4: float
    psi5: float
    psi6: float
    rho: float
    theta: float
    d: float


@dataclass(frozen=True)
class AsymptoticGramian:
    "Asymptotic normalized Gramian (real symmetric, r_pol x r_pol)."

    w_bar: np.ndarray
    config: str          # "ULA" or "UPA"
    t_pol: int
    r_pol: int

    def __post_init__(self):
        w = np.asarray(self.w_bar, dtype=float)
        object.__setattr__(self, "w_bar", w)
        if w.shape != (self.r_pol, self.r_pol):
            raise ValueError("w_bar must be r_pol x r_pol")
        if not np.allclose(w, w.T, rtol=0, atol=1e-12 * max(np.trace(w), 1e-300)):
            raise ValueError("w_bar must be symmetric")

    @property
    def eigenvalues(self) -> np.ndarray:
        "Eigenvalues in descending order, tiny negatives clamped to zero."
        e = np.sort(np.linalg.eigvalsh(self.w_bar))[::-1]
        e[e < 0] = 0.0
        return e

    @property
    def trace(self) -> float:
        return float(np.trace(self.w_bar))


@dataclass(frozen=True)
class Phi2Value:
    "Mean inverse-square distance over the panel, 1/m^2."

    value: float
    method: str          # "single_integral" or "double_quadrature"


def _check_elevation(theta: float):
    if not abs(theta) < np.pi / 2:
        raise ValueError("elevation must satisfy |theta| < pi/2")


def psi_set(rho: float, theta: float, d: float) -> PsiSet:
    """Evaluate psi_2..psi_6 for aperture ratio ``rho``, elevation ``theta``
    and distance ``d``.

    The rho -> 0 limits are handled analytically so a vanishing aperture
    degrades gracefully to the single-element values.
    """
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if d <= 0:
        raise ValueError("d must be positive")
    _check_elevation(theta)
    s, c = np.sin(theta), np.cos(theta)
    den = (1 + rho**2) ** 2 - (2 * rho * s) ** 2
    if rho == 0:
        bracket = 1.0     # lim arctan-average = 1
    else:
        bracket = (np.arctan((rho - s) / c) + np.arctan((rho + s) / c)) / (2 * rho * c)
    psi2 = bracket / d**2
    psi3 = -s / (d**3 * den)
    inner = ((1 + rho**2) - 2 * s**2) / den + bracket
    psi4 = inner / (2 * d**4 * c**2)
    psi5 = -(1 + rho**2) * s / (d**5 * den**2)
    psi6 = ((1 + rho**2) ** 2 - 4 * s**2) / (4 * d**6 * c**2 * den**2) \
        + 3 * inner / (8 * d**6 * c**4)
    return PsiSet(psi2=psi2, psi3=psi3, psi4=psi4, psi5=psi5, psi6=psi6,
                  rho=rho, theta=theta, d=d)


def psi_profile(x, x0: float, y0: float, z0: float, l_y: float):
    """x-resolved psi_2(x)..psi_6(x): the per-column linear-aperture integrals
    of a panel of half-height ``l_y``, receiver at (x0, y0, z0).

    Vectorized over ``x``.  Note the psi_6 bracket uses the same numerator
    structure as psi_4 (R^2 + L_y^2 - 2 y0^2).
    """
    x = np.asarray(x, dtype=float)
    ell2 = (x - x0) ** 2 + z0**2
    ell = np.sqrt(ell2)
    r2 = ell2 + y0**2
    den = (l_y**2 + r2) ** 2 - (2 * l_y * y0) ** 2
    p2 = (np.arctan2(l_y - y0, ell) + np.arctan2(l_y + y0, ell)) / (2 * l_y * ell)
    p3 = -y0 / den
    inner = (l_y**2 + r2 - 2 * y0**2) / den + p2
    p4 = inner / (2 * ell2)
    p5 = -y0 * (r2 + l_y**2) / den**2
    p6 = ((r2 + l_y**2) ** 2 - 4 * y0**2 * r2) / (4 * ell2 * den**2) \
        + 3 * inner / (8 * ell2**2)
    return p2, p3, p4, p5, p6


def partial_sum_sk(k: int, big_m: int, delta_t: float, d: float,
                   theta: float) -> float:
    """Riemann partial sum s_M^(k) of a (2M+1)-element line along y.

    Even k sums r^-k; odd k sums the signed offset (m*delta_t - D sin) / r^(k+1).
    Converges to psi_k as M -> inf with M*delta_t -> L.
    """
    if k not in (2, 3, 4, 5, 6):
        raise ValueError("k must be in 2..6")
    if big_m < 0 or delta_t <= 0:
        raise ValueError("big_m must be >= 0 and delta_t > 0")
    y0 = d * np.sin(theta)
    z0 = d * np.cos(theta)
    dm = np.arange(-big_m, big_m + 1) * delta_t - y0
    r2 = dm**2 + z0**2
    if k % 2 == 0:
        terms = r2 ** (-k // 2)
    else:
        terms = dm * r2 ** (-(k + 1) // 2)
    # fold symmetric index pairs so broadside odd sums cancel exactly
    folded = terms[big_m + 1:] + terms[big_m - 1::-1]
    return float((np.sum(folded) + terms[big_m]) / (2 * big_m + 1))


def _ula_w3(ps: PsiSet) -> np.ndarray:
    d, dc = ps.d, ps.d * np.cos(ps.theta)
    return d**2 * np.array([
        [ps.psi2, 0.0, 0.0],
        [0.0, ps.psi4 * dc**2, ps.psi3 * dc],
        [0.0, ps.psi3 * dc, ps.psi2 - ps.psi4 * dc**2],
    ])


def _ula_w2(ps: PsiSet) -> np.ndarray:
    d, dc = ps.d, ps.d * np.cos(ps.theta)
    return d**2 * np.array([
        [ps.psi2, 0.0, 0.0],
        [0.0, dc**4 * ps.psi6, dc**3 * ps.psi5],
        [0.0, dc**3 * ps.psi5, dc**2 * ps.psi4 - dc**4 * ps.psi6],
    ])


def ula_gramian(t_pol: int, r_pol: int, rho: float, theta: float,
                d: float) -> AsymptoticGramian:
    """Asymptotic normalized Gramian of a transmit line of half-length rho*d
    along y, receiver at elevation ``theta`` in the y-z plane.

    ``r_pol`` < 3 selects the leading principal submatrix.
    """
    if t_pol not in (2, 3):
        raise ValueError("closed forms exist for t_pol in {2, 3}")
    if r_pol not in (1, 2, 3):
        raise ValueError("r_pol must be 1, 2 or 3")
    ps = psi_set(rho, theta, d)
    w = _ula_w3(ps) if t_pol == 3 else _ula_w2(ps)
    return AsymptoticGramian(w_bar=w[:r_pol, :r_pol], config="ULA",
                             t_pol=t_pol, r_pol=r_pol)


def ula_gramian_offaxis(t_pol: int, r_pol: int, half_length: float, rx,
                        d: float, eps: float = 1e-3) -> AsymptoticGramian:
    """Transmit line along y with the receiver off the y-z plane (x0 != 0).

    Computed as the thin-panel limit of the planar closed forms: evaluate at
    panel half-widths eps*L and eps*L/2 and Richardson-extrapolate the O(l_x^2)
    error to zero.  eps ~ 1e-3 balances the extrapolation residual against
    cancellation noise in the panel formulas.
    """
    rx = np.asarray(rx, dtype=float)
    build = upa_gramian_3x3 if t_pol == 3 else upa_gramian_2x3
    w1 = build(upa_geometry(eps * half_length, half_length, rx), d).w_bar
    w2 = build(upa_geometry(eps * half_length / 2, half_length, rx), d).w_bar
    w = (4.0 * w2 - w1) / 3.0
    return AsymptoticGramian(w_bar=w[:r_pol, :r_pol], config="ULA",
                             t_pol=t_pol, r_pol=r_pol)


def phi2(l_x: float, l_y: float, x0: float, y0: float, z0: float,
         method: str = "single_integral", abs_tol: float = 1e-12) -> Phi2Value:
    """Mean of 1/R^2 over the panel.

    ``single_integral`` integrates psi_2(x) over the panel width (the inner
    integral done in closed form); ``double_quadrature`` evaluates the raw
    double integral and serves as the independent cross-check.
    """
    if l_x <= 0 or l_y <= 0:
        raise ValueError("l_x and l_y must be positive")
    if z0 <= 0:
        raise ValueError("receiver must have z0 > 0")
    if method == "single_integral":
        val, _ = adaptive_quad(
            lambda x: psi_profile(x, x0, y0, z0, l_y)[0], -l_x, l_x, abs_tol)
        return Phi2Value(value=float(val) / (2 * l_x), method=method)
    if method == "double_quadrature":
        def integrand(x, y):
            return 1.0 / ((x - x0) ** 2 + (y - y0) ** 2 + z0**2)
        val, _ = adaptive_quad_2d(integrand, -l_x, l_x, -l_y, l_y,
                                  abs_tol=max(abs_tol, 1e-13))
        return Phi2Value(value=float(val) / (4 * l_x * l_y), method=method)
    raise ValueError("method must be 'single_integral' or 'double_quadrature'")


def upa_gramian_3x3(g: UpaGeometry, d: float) -> AsymptoticGramian:
    """Asymptotic normalized Gramian for three transmit polarizations over a
    2L_x x 2L_y panel: an isotropic phi_2 part plus the edge-angle matrix."""
    p2 = phi2(g.l_x, g.l_y, g.x0, g.y0, g.z0).value
    cxp, cxm = g.cos_beta_x_plus, g.cos_beta_x_minus
    sxp, sxm = g.sin_beta_x_plus, g.sin_beta_x_minus
    cyp, cym = g.cos_beta_y_plus, g.cos_beta_y_minus
    syp, sym = g.sin_beta_y_plus, g.sin_beta_y_minus
    gyp, gym = g.gamma_y_plus, g.gamma_y_minus
    gxp, gxm = g.gamma_x_plus, g.gamma_x_minus
    log_term = np.log(g.d_mm * g.d_pp / (g.d_pm * g.d_mp))
    b = np.empty((3, 3))
    b[0, 0] = cxp * gyp + cxm * gym
    b[0, 1] = b[1, 0] = log_term
    b[0, 2] = b[2, 0] = -(sxp * gyp - sxm * gym)
    b[1, 1] = cyp * gxp + cym * gxm
    b[1, 2] = b[2, 1] = -(syp * gxp - sym * gxm)
    b[2, 2] = -(b[0, 0] + b[1, 1])
    w = p2 * d**2 * np.diag([0.5, 0.5, 1.0]) + d**2 / (8 * g.l_x * g.l_y) * b
    return AsymptoticGramian(w_bar=w, config="UPA", t_pol=3, r_pol=3)


def upa_gramian_2x3(g: UpaGeometry, d: float) -> AsymptoticGramian:
    """Asymptotic normalized Gramian for two transmit polarizations over the
    panel (receiver keeps all three)."""
    p2 = phi2(g.l_x, g.l_y, g.x0, g.y0, g.z0).value
    cxp, cxm = g.cos_beta_x_plus, g.cos_beta_x_minus
    sxp, sxm = g.sin_beta_x_plus, g.sin_beta_x_minus
    cyp, cym = g.cos_beta_y_plus, g.cos_beta_y_minus
    syp, sym = g.sin_beta_y_plus, g.sin_beta_y_minus
    gyp, gym = g.gamma_y_plus, g.gamma_y_minus
    gxp, gxm = g.gamma_x_plus, g.gamma_x_minus
    spp, spm = g.sigma_pp, g.sigma_pm
    smp, smm = g.sigma_mp, g.sigma_mm
    z0sq = g.z0**2
    log_term = np.log(g.d_mm * g.d_pp / (g.d_pm * g.d_mp))

    # sin^3/cos * sigma sums written with the cos cancelled against the sigma
    # numerators, which removes the spurious 0/0 at |x0| = L_x (|y0| = L_y)
    ell_xp = np.hypot(g.l_x - g.x0, g.z0)
    ell_xm = np.hypot(g.l_x + g.x0, g.z0)
    ell_yp = np.hypot(g.l_y - g.y0, g.z0)
    ell_ym = np.hypot(g.l_y + g.y0, g.z0)
    sig_xp = (g.l_y - g.y0) / g.d_pp**2 + (g.l_y + g.y0) / g.d_pm**2
    sig_xm = (g.l_y - g.y0) / g.d_mp**2 + (g.l_y + g.y0) / g.d_mm**2
    sig_yp = (g.l_x - g.x0) / g.d_pp**2 + (g.l_x + g.x0) / g.d_mp**2
    sig_ym = (g.l_x - g.x0) / g.d_pm**2 + (g.l_x + g.x0) / g.d_mm**2

    b = np.empty((3, 3))
    b[0, 0] = (-cyp * gxp - cym * gxm
               + (4 - cxp**2) * cxp * gyp + (4 - cxm**2) * cxm * gym
               + sxp**2 * (spp + spm) + sxm**2 * (smp + smm))
    b[0, 1] = b[1, 0] = 4 * log_term - z0sq * (
        g.d_pp**-2 + g.d_mm**-2 - g.d_pm**-2 - g.d_mp**-2)
    b[0, 2] = b[2, 0] = (sxm**3 * ell_xm * sig_xm - sxp**3 * ell_xp * sig_xp
                         + sxm**3 * gym - sxp**3 * gyp)
    b[1, 1] = (-cxp * gyp - cxm * gym
               + (4 - cyp**2) * cyp * gxp + (4 - cym**2) * cym * gxm
               + syp**2 * (spp + smp) + sym**2 * (spm + smm))
    b[1, 2] = b[2, 1] = (sym**3 * ell_ym * sig_ym - syp**3 * ell_yp * sig_yp
                         + sym**3 * gxm - syp**3 * gxp)
    b[2, 2] = ((1 + cyp**2) * cyp * gxp + (1 + cym**2) * cym * gxm
               + (1 + cxp**2) * cxp * gyp + (1 + cxm**2) * cxm * gym
               - sxp**2 * (spp + spm) - sxm**2 * (smp + smm)
               - syp**2 * (spp + smp) - sym**2 * (spm + smm))
    w = np.diag([p2 * d**2 / 2, p2 * d**2 / 2, 0.0]) \
        + d**2 / (32 * g.l_x * g.l_y) * b
    return AsymptoticGramian(w_bar=w, config="UPA", t_pol=2, r_pol=3)


def upa_single_integral_2x3(g: UpaGeometry, d: float,
                            abs_tol: float = 1e-12) -> AsymptoticGramian:
    """Two-polarization panel Gramian via the 1-D integral of the x-resolved
    psi profile; independent oracle for the closed form."""
    z0 = g.z0

    def integrand(x):
        p2, p3, p4, p5, p6 = psi_profile(x, g.x0, g.y0, z0, g.l_y)
        dx = x - g.x0
        w = np.empty(x.shape + (3, 3))
        w[..., 0, 0] = p2 - dx**2 * (p4 + z0**2 * p6)
        w[..., 0, 1] = w[..., 1, 0] = -dx * (p3 + z0**2 * p5)
        w[..., 0, 2] = w[..., 2, 0] = dx * z0**3 * p6
        w[..., 1, 1] = dx**2 * (p4 + z0**2 * p6) + z0**4 * p6
        w[..., 1, 2] = w[..., 2, 1] = z0**3 * p5
        w[..., 2, 2] = z0**2 * (p4 - z0**2 * p6)
        return w

    val, _ = adaptive_quad(integrand, -g.l_x, g.l_x, abs_tol)
    w = d**2 / (2 * g.l_x) * val
    w = 0.5 * (w + w.T)
    return AsymptoticGramian(w_bar=w, config="UPA", t_pol=2, r_pol=3)


def _projector_entries(dx, dy, z0):
    "Entries of the transverse projector times R^2, as a (..., 3, 3) stack."
    p = np.empty(np.broadcast(dx, dy).shape + (3, 3))
    p[..., 0, 0] = dy**2 + z0**2
    p[..., 0, 1] = p[..., 1, 0] = -dx * dy
    p[..., 0, 2] = p[..., 2, 0] = z0 * dx
    p[..., 1, 1] = dx**2 + z0**2
    p[..., 1, 2] = p[..., 2, 1] = z0 * dy
    p[..., 2, 2] = dx**2 + dy**2
    return p


def quadrature_oracle(config: str, g, d: float, t_pol: int, r_pol: int,
                      abs_tol: float = 1e-11) -> AsymptoticGramian:
    """Ground-truth asymptotic Gramian by direct numerical integration of the
    projector-product integrand over the aperture.

    ``config`` is "UPA" (g: UpaGeometry, double integral) or "ULA"
    (g: (half_length, rx) with the line along y, single integral).
    """
    if t_pol not in (1, 2, 3) or r_pol not in (1, 2, 3):
        raise ValueError("t_pol and r_pol must be 1, 2 or 3")

    if config == "UPA":
        x0, y0, z0 = g.x0, g.y0, g.z0

        def integrand(x, y):
            dx, dy = x - x0, y - y0
            r2 = dx**2 + dy**2 + z0**2
            p = _projector_entries(dx, dy, z0) / r2[..., None, None]
            psel = p[..., :r_pol, :t_pol]
            return np.einsum("...ab,...cb,...->...ac", psel, psel, 1.0 / r2)

        val, _ = adaptive_quad_2d(integrand, -g.l_x, g.l_x, -g.l_y, g.l_y,
                                  abs_tol=abs_tol)
        w = d**2 / (4 * g.l_x * g.l_y) * val
    elif config == "ULA":
        half_length, rx = g
        rx = np.asarray(rx, dtype=float)
        x0, y0, z0 = rx

        def integrand(y):
            dy = y - y0
            dx = np.full_like(dy, -x0)
            r2 = dx**2 + dy**2 + z0**2
            p = _projector_entries(dx, dy, z0) / r2[..., None, None]
            psel = p[..., :r_pol, :t_pol]
            return np.einsum("...ab,...cb,...->...ac", psel, psel, 1.0 / r2)

        val, _ = adaptive_quad(integrand, -half_length, half_length, abs_tol)
        w = d**2 / (2 * half_length) * val
    else:
        raise ValueError("config must be 'ULA' or 'UPA'")
    w = 0.5 * (w + w.T)
    return AsymptoticGramian(w_bar=w, config=config, t_pol=t_pol, r_pol=r_pol)
