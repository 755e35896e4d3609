"""Dipole channel blocks (exact and radiative), stacked multi-antenna channel
matrices, finite normalized Gramians, and the radiative-approximation error
bounds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ArraySpec, RxSpec, element_positions

__all__ = [
    "PhysicalConstants",
    "ChannelMatrix",
    "FiniteGramian",
    "Lemma1Report",
    "exact_block",
    "radiative_block",
    "stack_channel",
    "finite_gramian",
    "gramian_error_block",
    "element_error_bound",
    "lemma1_verify",
]

_MIN_SEPARATION = 1e-12


@dataclass(frozen=True)
class PhysicalConstants:
    "Wavelength and the complex coupling constant of the link budget."

    lam: float
    xi: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("wavelength must be positive")
        if self.xi == 0:
            raise ValueError("xi must be nonzero")


@dataclass
class ChannelMatrix:
    "Stacked channel: (n_r * r_pol) rows by (n_elements * t_pol) columns."

    entries: np.ndarray
    model_tag: str       # "exact" or "radiative"
    t_pol: int
    r_pol: int
    n_r: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("channel entries must be finite")
        if self.entries.shape[0] != self.n_r * self.r_pol:
            raise ValueError("row count inconsistent with n_r * r_pol")


@dataclass
class FiniteGramian:
    """Normalized Gramian of the radiative channel: the per-element projector
    products averaged over the array and scaled by (d_ref / r)^2.  The link
    constant |xi/lambda|^2 is factored out entirely."""

    w: np.ndarray
    d_ref: float
    n_elements: int

    def __post_init__(self):
        w = np.asarray(self.w)
        tr = float(np.real(np.trace(w)))
        scale = max(abs(tr), 1e-300)
        if np.max(np.abs(w - w.conj().T)) > 1e-13 * scale:
            raise ValueError("Gramian must be Hermitian")
        eigs = np.linalg.eigvalsh(w)
        if eigs.min() < -1e-12 * scale:
            raise ValueError("Gramian must be positive semidefinite")
        self.w = w

    @property
    def eigenvalues(self) -> np.ndarray:
        e = np.sort(np.linalg.eigvalsh(self.w))[::-1]
        e[e < 0] = 0.0
        return e


@dataclass(frozen=True)
class Lemma1Report:
    """Measured worst-case Gramian error of the radiative approximation
    against its distance-only upper bounds.

    ``bound_tpol3_printed`` is the simplified three-polarization bound in the
    form it is usually quoted; it understates the true supremum by up to the
    factor 2/(1+2/pi) (see ``bound_tpol3_tight``, which is attained exactly
    when all three receive polarizations are kept).
    """

    d_inf: float
    bound_general: float
    measured_sup_norm: float
    bound_tpol3_printed: float | None = None
    bound_tpol3_tight: float | None = None
    t_pol: int = 3
    r_pol: int = 3


def _separation(tx, rx):
    d = np.asarray(tx, dtype=float) - np.asarray(rx, dtype=float)
    r = float(np.linalg.norm(d))
    if r < _MIN_SEPARATION:
        raise ValueError("transmit element and receiver coincide")
    return d, r


def exact_block(tx, rx, c: PhysicalConstants) -> np.ndarray:
    """Full 3x3 dipole channel between an element at ``tx`` and a receiver at
    ``rx``, radiative and reactive terms included."""
    d, r = _separation(tx, rx)
    uu = np.outer(d, d) / r**2
    delta = 1j * c.lam / (2 * np.pi * r) - (c.lam / (2 * np.pi * r)) ** 2
    alpha = 1.0 + delta
    beta = 1.0 + 3.0 * delta
    scale = c.xi / (c.lam * r) * np.exp(-2j * np.pi * r / c.lam)
    return scale * (alpha * np.eye(3) - beta * uu)


def radiative_block(tx, rx, c: PhysicalConstants) -> np.ndarray:
    """Radiative-only 3x3 block: the transverse projector scaled by the
    spherical spreading factor and the propagation phase."""
    d, r = _separation(tx, rx)
    proj = np.eye(3) - np.outer(d, d) / r**2
    scale = c.xi / (c.lam * r) * np.exp(-2j * np.pi * r / c.lam)
    return scale * proj


def stack_channel(a: ArraySpec, rx: RxSpec, c: PhysicalConstants,
                  model: str = "radiative") -> ChannelMatrix:
    """Stack the per-element blocks side by side (columns, element-major) and
    the per-receive-antenna blocks on top of one another (rows)."""
    if model == "exact":
        block = exact_block
    elif model == "radiative":
        block = radiative_block
    else:
        raise ValueError("model must be 'exact' or 'radiative'")
    pos = element_positions(a)
    h = np.empty((rx.n_r * rx.r_pol, a.n_elements * a.t_pol), dtype=complex)
    for i, rxp in enumerate(rx.positions):
        for e, txp in enumerate(pos):
            blk = block(txp, rxp, c)
            h[i * rx.r_pol:(i + 1) * rx.r_pol,
              e * a.t_pol:(e + 1) * a.t_pol] = blk[:rx.r_pol, :a.t_pol]
    return ChannelMatrix(entries=h, model_tag=model, t_pol=a.t_pol,
                         r_pol=rx.r_pol, n_r=rx.n_r)


def _projector_stack(dx, dy, z0):
    "Transverse projectors for a grid of element offsets, shape (3, 3, ...)."
    r2 = dx**2 + dy**2 + z0**2
    p = np.empty((3, 3) + r2.shape)
    p[0, 0] = dy**2 + z0**2
    p[0, 1] = p[1, 0] = -dx * dy
    p[0, 2] = p[2, 0] = z0 * dx
    p[1, 1] = dx**2 + z0**2
    p[1, 2] = p[2, 1] = z0 * dy
    p[2, 2] = dx**2 + dy**2
    return p / r2, r2


def finite_gramian(a: ArraySpec, rx: RxSpec, d_ref: float,
                   lam: float | None = None) -> FiniteGramian:
    """Normalized Gramian of the radiative channel of a finite array.

    For a single receive antenna the propagation phases cancel and only the
    geometry enters.  For n_r > 1 the cross-antenna phase coherence matters,
    so ``lam`` is required.
    """
    if d_ref <= 0:
        raise ValueError("d_ref must be positive")
    k = np.arange(-a.k_half, a.k_half + 1) * a.delta_t
    m = np.arange(-a.m_half, a.m_half + 1) * a.delta_t
    n = a.n_elements

    if rx.n_r == 1:
        x0, y0, z0 = rx.positions[0]
        if z0 <= 0:
            raise ValueError("receiver must have z > 0")
        dx = (k - x0)[:, None]
        dy = (m - y0)[None, :]
        p, r2 = _projector_stack(dx, dy, z0)
        psel = p[:rx.r_pol, :a.t_pol].reshape(rx.r_pol, a.t_pol, -1)
        w = np.einsum("abn,cbn,n->ac", psel, psel, 1.0 / r2.ravel())
        w *= d_ref**2 / n
        return FiniteGramian(w=w, d_ref=d_ref, n_elements=n)

    if lam is None:
        raise ValueError("lam is required for multi-antenna receivers "
                         "(cross-antenna phases do not cancel)")
    # blockwise sum of outer products of per-element stacked columns,
    # |xi/lambda|^2 scaled out and rows normalized by d_ref/r
    kk, mm = np.meshgrid(k, m, indexing="ij")
    w = np.zeros((rx.n_r * rx.r_pol, rx.n_r * rx.r_pol), dtype=complex)
    cols = np.empty((rx.n_r * rx.r_pol, a.t_pol), dtype=complex)
    for dx0, dy0 in zip(kk.ravel(), mm.ravel()):
        for i, (x0, y0, z0) in enumerate(rx.positions):
            dx, dy = dx0 - x0, dy0 - y0
            r2 = dx * dx + dy * dy + z0 * z0
            r = np.sqrt(r2)
            p, _ = _projector_stack(np.asarray(dx), np.asarray(dy), z0)
            phase = np.exp(-2j * np.pi * r / lam)
            cols[i * rx.r_pol:(i + 1) * rx.r_pol] = \
                (d_ref / r) * phase * p[:rx.r_pol, :a.t_pol]
        w += cols @ cols.conj().T
    w /= n
    w = 0.5 * (w + w.conj().T)
    return FiniteGramian(w=w, d_ref=d_ref, n_elements=n)


def gramian_error_block(tx, rx, c: PhysicalConstants, t_pol: int,
                        r_pol: int) -> np.ndarray:
    """Per-element Gramian error of the radiative approximation: the exact
    block's outer product minus the projector outer product at 1/r^2."""
    d, r = _separation(tx, rx)
    h = exact_block(tx, rx, c)[:r_pol, :t_pol]
    proj = (np.eye(3) - np.outer(d, d) / r**2)[:r_pol, :t_pol]
    q = abs(c.xi / c.lam) ** 2
    return h @ h.conj().T - q / r**2 * (proj @ proj.conj().T)


def element_error_bound(r: float, c: PhysicalConstants) -> float:
    "Distance-r form of the general Gramian error bound (any polarizations)."
    q = abs(c.xi / c.lam) ** 2
    eps = c.lam / (2 * np.pi * r)
    return (8 * q * c.lam / (2 * np.pi * r**3) * (1 + eps)
            + 32 * q * c.lam**2 / ((2 * np.pi) ** 3 * r**4) * (1 + eps**2))


def _tpol3_bounds(d_inf: float, c: PhysicalConstants):
    "Printed and tight simplified bounds for three transmit polarizations."
    xi2 = abs(c.xi) ** 2
    printed = ((1 + 2 / np.pi) * xi2 / (2 * np.pi**2 * d_inf**4)
               + abs(c.lam * c.xi) ** 2 / (2 * np.pi**5 * d_inf**6))
    # ||E|| = 2*c1*(1+eps^2) exactly for (3, 3); see the radiative-error tests
    tight = (xi2 / (np.pi**2 * d_inf**4)
             + abs(c.lam * c.xi) ** 2 / (4 * np.pi**4 * d_inf**6))
    return printed, tight


def lemma1_verify(a: ArraySpec, rx_point, c: PhysicalConstants,
                  t_pol: int | None = None,
                  r_pol: int = 3) -> Lemma1Report:
    """Measure the supremum over elements of the Gramian error spectral norm
    and compare against the distance-only bounds at d_inf."""
    t_pol = a.t_pol if t_pol is None else t_pol
    rx_point = np.asarray(rx_point, dtype=float)
    pos = element_positions(a)
    sup_norm = 0.0
    d_inf = np.inf
    for txp in pos:
        r = float(np.linalg.norm(txp - rx_point))
        d_inf = min(d_inf, r)
        e = gramian_error_block(txp, rx_point, c, t_pol, r_pol)
        sup_norm = max(sup_norm, float(np.linalg.norm(e, 2)))
    q = abs(c.xi / c.lam) ** 2
    eps = c.lam / (2 * np.pi * d_inf)
    bound_general = (8 * q * c.lam / (2 * np.pi * d_inf**3) * (1 + eps)
                     + 32 * q * c.lam**2 / ((2 * np.pi) ** 3 * d_inf**4)
                     * (1 + eps**2))
    printed = tight = None
    if t_pol == 3:
        printed, tight = _tpol3_bounds(d_inf, c)
    return Lemma1Report(d_inf=d_inf, bound_general=bound_general,
                        measured_sup_norm=sup_norm,
                        bound_tpol3_printed=printed,
                        bound_tpol3_tight=tight, t_pol=t_pol, r_pol=r_pol)
