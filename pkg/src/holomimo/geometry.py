"""Array and receiver geometry: element placement and the derived angle/distance
quantities that parameterize the asymptotic Gramians."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ArraySpec",
    "RxSpec",
    "PolarPlacement",
    "UpaGeometry",
    "element_positions",
    "polar_to_cartesian",
    "upa_geometry",
    "rayleigh_spacing_product",
]


@dataclass(frozen=True)
class ArraySpec:
    """Transmit UPA on the z=0 plane: (2*k_half+1) columns along x times
    (2*m_half+1) rows along y, spaced ``delta_t`` meters, ``t_pol`` dipoles
    per element (selected in x, y, z order)."""

    delta_t: float
    m_half: int
    k_half: int = 0
    t_pol: int = 3

    def __post_init__(self):
        if self.delta_t <= 0:
            raise ValueError("delta_t must be positive")
        if self.m_half < 0 or self.k_half < 0:
            raise ValueError("m_half and k_half must be >= 0")
        if self.t_pol not in (1, 2, 3):
            raise ValueError("t_pol must be 1, 2 or 3")

    @property
    def n_elements(self) -> int:
        return (2 * self.m_half + 1) * (2 * self.k_half + 1)

    @property
    def half_length_y(self) -> float:
        "Half aperture along y, M*delta_t."
        return self.m_half * self.delta_t

    @property
    def half_length_x(self) -> float:
        return self.k_half * self.delta_t


@dataclass
class RxSpec:
    """Receiver side: one or more antennas (each up to three dipoles, selected
    in x, y, z order), all in the z > 0 half space."""

    positions: np.ndarray
    r_pol: int = 3
    delta_r: float = 0.0

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if self.positions.shape[1] != 3:
            raise ValueError("positions must be (n_r, 3)")
        if np.any(self.positions[:, 2] <= 0):
            raise ValueError("all receiver positions must have z > 0")
        if self.r_pol not in (1, 2, 3):
            raise ValueError("r_pol must be 1, 2 or 3")
        if self.n_r > 1 and self.delta_r <= 0:
            raise ValueError("delta_r must be positive for multi-antenna receivers")

    @property
    def n_r(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def single(cls, position, r_pol: int = 3) -> "RxSpec":
        return cls(positions=np.asarray(position, dtype=float)[None, :], r_pol=r_pol)

    @classmethod
    def line(cls, center, n_r: int, delta_r: float, r_pol: int = 3,
             axis: str = "y") -> "RxSpec":
        """``n_r`` antennas on a line through ``center``, spacing ``delta_r``.

        The line is parallel to the given coordinate axis (default y, i.e.
        parallel to the transmit columns) and centered on ``center``.
        """
        if n_r < 1:
            raise ValueError("n_r must be >= 1")
        unit = {"x": 0, "y": 1, "z": 2}
        if axis not in unit:
            raise ValueError("axis must be 'x', 'y' or 'z'")
        center = np.asarray(center, dtype=float)
        offsets = (np.arange(n_r) - (n_r - 1) / 2.0) * delta_r
        positions = np.tile(center, (n_r, 1))
        positions[:, unit[axis]] += offsets
        return cls(positions=positions, r_pol=r_pol,
                   delta_r=delta_r if n_r > 1 else 0.0)


@dataclass(frozen=True)
class PolarPlacement:
    """Receiver placement in the y-z plane: distance D from the array center
    and elevation theta, mapping to (0, D sin(theta), D cos(theta))."""

    distance: float
    elevation: float

    def __post_init__(self):
        if self.distance <= 0:
            raise ValueError("distance must be positive")
        if not abs(self.elevation) < np.pi / 2:
            raise ValueError("elevation must satisfy |theta| < pi/2")


def polar_to_cartesian(p: PolarPlacement) -> np.ndarray:
    "Cartesian receiver position (0, D sin(theta), D cos(theta))."
    return np.array([0.0,
                     p.distance * np.sin(p.elevation),
                     p.distance * np.cos(p.elevation)])


def element_positions(spec: ArraySpec) -> np.ndarray:
    """All (k*delta_t, m*delta_t, 0) element positions, k-major then m ascending.

    Returns an (n_elements, 3) array; ordering matches the column-block layout
    of the stacked channel matrix.
    """
    k = np.arange(-spec.k_half, spec.k_half + 1) * spec.delta_t
    m = np.arange(-spec.m_half, spec.m_half + 1) * spec.delta_t
    kk, mm = np.meshgrid(k, m, indexing="ij")
    out = np.zeros((spec.n_elements, 3))
    out[:, 0] = kk.ravel()
    out[:, 1] = mm.ravel()
    return out


def rayleigh_spacing_product(d: float, lam: float, m_streams: int) -> float:
    """Spacing product delta_T * delta_R = D*lambda/M supporting M parallel
    streams between confronted ULAs."""
    if d <= 0 or lam <= 0 or m_streams <= 0:
        raise ValueError("all inputs must be positive")
    return d * lam / m_streams


@dataclass(frozen=True)
class UpaGeometry:
    """Derived geometry of a 2L_x x 2L_y panel seen from a receiver.

    Superscript convention: '+' refers to the panel edge on the positive side
    of the axis (x = +L_x resp. y = +L_y), '-' to the negative side.  Each
    view angle gamma is the angle subtending its edge's two vertices; each
    tilt angle beta is the angle between the panel plane and the triangle of
    that edge; sigma_ab are the sine products at vertex (a*L_x, b*L_y).
    """

    l_x: float
    l_y: float
    x0: float
    y0: float
    z0: float
    d_pp: float = field(init=False)
    d_pm: float = field(init=False)
    d_mp: float = field(init=False)
    d_mm: float = field(init=False)
    gamma_x_plus: float = field(init=False)
    gamma_x_minus: float = field(init=False)
    gamma_y_plus: float = field(init=False)
    gamma_y_minus: float = field(init=False)
    cos_beta_x_plus: float = field(init=False)
    cos_beta_x_minus: float = field(init=False)
    cos_beta_y_plus: float = field(init=False)
    cos_beta_y_minus: float = field(init=False)
    sin_beta_x_plus: float = field(init=False)
    sin_beta_x_minus: float = field(init=False)
    sin_beta_y_plus: float = field(init=False)
    sin_beta_y_minus: float = field(init=False)
    sigma_pp: float = field(init=False)
    sigma_pm: float = field(init=False)
    sigma_mp: float = field(init=False)
    sigma_mm: float = field(init=False)

    def __post_init__(self):
        if self.l_x <= 0 or self.l_y <= 0:
            raise ValueError("l_x and l_y must be positive")
        if self.z0 <= 0:
            raise ValueError("receiver must have z0 > 0")
        lx, ly, x0, y0, z0 = self.l_x, self.l_y, self.x0, self.y0, self.z0

        # distances from receiver to the edge lines x = +/-L_x, y = +/-L_y
        ell_xp = np.hypot(lx - x0, z0)
        ell_xm = np.hypot(lx + x0, z0)
        ell_yp = np.hypot(ly - y0, z0)
        ell_ym = np.hypot(ly + y0, z0)

        def _set(name, value):
            object.__setattr__(self, name, float(value))

        _set("d_pp", np.sqrt((lx - x0) ** 2 + (ly - y0) ** 2 + z0**2))
        _set("d_pm", np.sqrt((lx - x0) ** 2 + (ly + y0) ** 2 + z0**2))
        _set("d_mp", np.sqrt((lx + x0) ** 2 + (ly - y0) ** 2 + z0**2))
        _set("d_mm", np.sqrt((lx + x0) ** 2 + (ly + y0) ** 2 + z0**2))

        # view angles of the four edges (atan2 keeps quadrants right when the
        # receiver sits outside the panel footprint)
        _set("gamma_y_plus", np.arctan2(ly - y0, ell_xp) + np.arctan2(ly + y0, ell_xp))
        _set("gamma_y_minus", np.arctan2(ly - y0, ell_xm) + np.arctan2(ly + y0, ell_xm))
        _set("gamma_x_plus", np.arctan2(lx - x0, ell_yp) + np.arctan2(lx + x0, ell_yp))
        _set("gamma_x_minus", np.arctan2(lx - x0, ell_ym) + np.arctan2(lx + x0, ell_ym))

        _set("cos_beta_x_plus", (lx - x0) / ell_xp)
        _set("cos_beta_x_minus", (lx + x0) / ell_xm)
        _set("cos_beta_y_plus", (ly - y0) / ell_yp)
        _set("cos_beta_y_minus", (ly + y0) / ell_ym)
        _set("sin_beta_x_plus", z0 / ell_xp)
        _set("sin_beta_x_minus", z0 / ell_xm)
        _set("sin_beta_y_plus", z0 / ell_yp)
        _set("sin_beta_y_minus", z0 / ell_ym)

        _set("sigma_pp", (lx - x0) * (ly - y0) / self.d_pp**2)
        _set("sigma_pm", (lx - x0) * (ly + y0) / self.d_pm**2)
        _set("sigma_mp", (lx + x0) * (ly - y0) / self.d_mp**2)
        _set("sigma_mm", (lx + x0) * (ly + y0) / self.d_mm**2)


def upa_geometry(l_x: float, l_y: float, rx) -> UpaGeometry:
    "Build the derived panel geometry for a receiver at cartesian ``rx``."
    rx = np.asarray(rx, dtype=float)
    return UpaGeometry(l_x=l_x, l_y=l_y, x0=rx[0], y0=rx[1], z0=rx[2])
