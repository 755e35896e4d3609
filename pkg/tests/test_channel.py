import numpy as np
import pytest

from holomimo.channel import (
    PhysicalConstants,
    element_error_bound,
    exact_block,
    finite_gramian,
    gramian_error_block,
    lemma1_verify,
    radiative_block,
    stack_channel,
)
from holomimo.geometry import ArraySpec, RxSpec, element_positions

C01 = PhysicalConstants(lam=0.01, xi=1.0)


def test_exact_block_on_axis_far_field():
    h = exact_block([0, 0, 0], [0, 0, 50.0], C01)
    scale = C01.xi / (C01.lam * 50.0) * np.exp(-2j * np.pi * 50.0 / C01.lam)
    off = h - np.diag(np.diag(h))
    assert np.max(np.abs(off)) == 0.0
    assert h[0, 0] / scale == pytest.approx(1.0, abs=1e-4)
    assert h[1, 1] / scale == pytest.approx(1.0, abs=1e-4)
    assert abs(h[2, 2] / scale) < 1e-4


def test_exact_block_alpha_unit_modulus_at_resonant_radius():
    r = C01.lam / (2 * np.pi)
    h = exact_block([0, 0, 0], [r, 0, 0], C01)
    # on the x axis the (2,2) entry is alpha times the scalar factor
    scale = C01.xi / (C01.lam * r) * np.exp(-2j * np.pi * r / C01.lam)
    assert abs(h[1, 1] / scale) == pytest.approx(1.0, abs=1e-14)


def test_exact_block_matches_extended_precision():
    from mpmath import exp, mp, mpc, mpf, pi, sqrt

    mp.dps = 40
    tx = np.array([0.013, -0.007, 0.0])
    rx = np.array([0.41, 0.22, 1.7])
    c = PhysicalConstants(lam=0.01, xi=0.8 - 0.3j)
    h = exact_block(tx, rx, c)

    d = [mpf(float(a)) - mpf(float(b)) for a, b in zip(tx, rx)]
    r = sqrt(sum(x * x for x in d))
    lam = mpf("0.01")
    xi = mpc("0.8", "-0.3")
    delta = mpc(0, 1) * lam / (2 * pi * r) - (lam / (2 * pi * r)) ** 2
    alpha, beta = 1 + delta, 1 + 3 * delta
    scale = xi / (lam * r) * exp(mpc(0, -2) * pi * r / lam)
    for i in range(3):
        for j in range(3):
            uu = d[i] * d[j] / r**2
            want = scale * ((alpha if i == j else 0) - beta * uu)
            assert abs(complex(want) - h[i, j]) < 1e-13 * abs(complex(want))


def test_radiative_projector_properties(rng):
    for _ in range(10):
        tx = rng.normal(size=3)
        rx = rng.normal(size=3) + np.array([0, 0, 3.0])
        h = radiative_block(tx, rx, C01)
        r = np.linalg.norm(np.asarray(tx) - rx)
        scale = C01.xi / (C01.lam * r) * np.exp(-2j * np.pi * r / C01.lam)
        p = (h / scale).real
        assert np.allclose(p @ p, p, atol=1e-14)
        assert np.trace(p) == pytest.approx(2.0, abs=1e-14)


def test_radiative_on_axis():
    h = radiative_block([0, 0, 0], [0, 0, 2.0], C01)
    scale = C01.xi / (C01.lam * 2.0) * np.exp(-2j * np.pi * 2.0 / C01.lam)
    assert np.allclose(h / scale, np.diag([1.0, 1.0, 0.0]), atol=1e-15)


def test_projector_entry_layout():
    # entries follow the offset layout with dk = k*dt - x0, dm = m*dt - y0
    dt, x0, y0, z0 = 0.5, 0.3, -0.2, 4.0
    for k, m in [(-1, 2), (0, 0), (2, -1)]:
        tx = np.array([k * dt, m * dt, 0.0])
        rx = np.array([x0, y0, z0])
        dk, dm = k * dt - x0, m * dt - y0
        r2 = dk**2 + dm**2 + z0**2
        want = np.array([
            [dm**2 + z0**2, -dk * dm, z0 * dk],
            [-dk * dm, dk**2 + z0**2, z0 * dm],
            [z0 * dk, z0 * dm, dk**2 + dm**2],
        ]) / r2
        h = radiative_block(tx, rx, C01)
        r = np.sqrt(r2)
        scale = C01.xi / (C01.lam * r) * np.exp(-2j * np.pi * r / C01.lam)
        assert np.allclose((h / scale).real, want, atol=1e-14)


def test_coincident_points_raise():
    with pytest.raises(ValueError):
        exact_block([0, 0, 1], [0, 0, 1], C01)
    with pytest.raises(ValueError):
        radiative_block([0, 0, 1], [0, 0, 1], C01)


def test_stack_degenerate_equals_block():
    a = ArraySpec(delta_t=0.01, m_half=0, k_half=0, t_pol=3)
    rx = RxSpec.single([0.1, 0.2, 3.0])
    h = stack_channel(a, rx, C01, model="exact")
    assert np.allclose(h.entries, exact_block([0, 0, 0], [0.1, 0.2, 3.0], C01))


def test_stack_tpol2_removes_every_third_column():
    a3 = ArraySpec(delta_t=0.01, m_half=1, k_half=1, t_pol=3)
    a2 = ArraySpec(delta_t=0.01, m_half=1, k_half=1, t_pol=2)
    rx = RxSpec.single([0.1, -0.3, 2.0])
    h3 = stack_channel(a3, rx, C01).entries
    h2 = stack_channel(a2, rx, C01).entries
    keep = [c for c in range(h3.shape[1]) if c % 3 != 2]
    assert np.allclose(h2, h3[:, keep])


def test_stack_multi_antenna_blocks():
    a = ArraySpec(delta_t=0.01, m_half=1, k_half=0, t_pol=3)
    rx2 = RxSpec.line([0, 0, 3.0], n_r=2, delta_r=0.5, r_pol=3)
    h = stack_channel(a, rx2, C01).entries
    for i in range(2):
        single = stack_channel(a, RxSpec.single(rx2.positions[i]), C01).entries
        assert np.allclose(h[3 * i:3 * i + 3], single)


def test_finite_gramian_single_projector():
    a = ArraySpec(delta_t=0.01, m_half=0, k_half=0, t_pol=3)
    w = finite_gramian(a, RxSpec.single([0, 0, 4.0]), d_ref=4.0).w
    assert np.max(np.abs(w - np.diag([1.0, 1.0, 0.0]))) <= 1e-14


def test_finite_gramian_trace_identity(rng):
    a = ArraySpec(delta_t=0.05, m_half=4, k_half=3, t_pol=3)
    rx_pos = np.array([0.2, -0.4, 3.0])
    w = finite_gramian(a, RxSpec.single(rx_pos), d_ref=4.0).w
    r2 = np.sum((element_positions(a) - rx_pos) ** 2, axis=1)
    want = 16.0 / a.n_elements * np.sum(2.0 / r2)
    assert np.trace(w).real == pytest.approx(want, rel=1e-13)


def test_finite_gramian_matches_elementwise_sum_oracle():
    # independent per-element summation in shuffled order
    a = ArraySpec(delta_t=0.05, m_half=5, k_half=2, t_pol=2)
    rx_pos = np.array([0.1, 0.6, 2.5])
    w = finite_gramian(a, RxSpec.single(rx_pos, r_pol=3), d_ref=4.0).w
    pos = element_positions(a)
    order = np.random.default_rng(3).permutation(len(pos))
    acc = np.zeros((3, 3))
    for idx in order:
        d = pos[idx] - rx_pos
        r2 = d @ d
        p = (np.eye(3) - np.outer(d, d) / r2)[:3, :2]
        acc += p @ p.T * 16.0 / (a.n_elements * r2)
    assert np.max(np.abs(acc - w)) <= 1e-13 * np.trace(w).real


def test_finite_gramian_rank_and_psd():
    a = ArraySpec(delta_t=0.02, m_half=10, k_half=10, t_pol=3)
    g = finite_gramian(a, RxSpec.single([0.3, 0.1, 1.5]), d_ref=2.0)
    eigs = g.eigenvalues
    assert eigs.min() >= 0
    assert len(eigs) == 3


def test_finite_gramian_multi_antenna_equals_stacked_product():
    # with xi = lam the stacked radiative channel times d_ref is the
    # normalized channel, so W = d^2 * H H^h / n
    lam = 0.01
    c = PhysicalConstants(lam=lam, xi=lam)
    a = ArraySpec(delta_t=0.05, m_half=3, k_half=0, t_pol=3)
    rx = RxSpec.line([0, 0, 3.0], n_r=2, delta_r=0.02, r_pol=2)
    w = finite_gramian(a, rx, d_ref=3.0, lam=lam).w
    h = stack_channel(a, rx, c).entries
    want = 9.0 * (h @ h.conj().T) / a.n_elements
    assert np.max(np.abs(w - want)) <= 1e-12 * np.trace(want).real


def test_finite_gramian_multi_antenna_requires_lam():
    a = ArraySpec(delta_t=0.05, m_half=1, k_half=0)
    rx = RxSpec.line([0, 0, 3.0], n_r=2, delta_r=0.02)
    with pytest.raises(ValueError):
        finite_gramian(a, rx, d_ref=3.0)


def test_gramian_xi_scaling_invariance():
    # the normalized gramian never sees xi; the raw stacked gramian scales
    a = ArraySpec(delta_t=0.05, m_half=2, k_half=0)
    rx = RxSpec.single([0, 0.2, 3.0])
    w1 = finite_gramian(a, rx, d_ref=3.0).w
    w2 = finite_gramian(a, rx, d_ref=3.0).w
    assert np.array_equal(w1, w2)
    c1 = PhysicalConstants(lam=0.01, xi=1.0)
    c2 = PhysicalConstants(lam=0.01, xi=2.0j)
    h1 = stack_channel(a, rx, c1).entries
    h2 = stack_channel(a, rx, c2).entries
    g1 = h1 @ h1.conj().T
    g2 = h2 @ h2.conj().T
    assert np.allclose(g2, 4.0 * g1, rtol=1e-13)


def test_per_element_error_bound(rng):
    for _ in range(40):
        lam = float(rng.choice([0.005, 0.01, 0.1]))
        c = PhysicalConstants(lam=lam, xi=complex(rng.normal(), rng.normal()))
        tx = np.array([rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0])
        rx = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1),
                       rng.uniform(0.2, 10.0)])
        t_pol = int(rng.integers(1, 4))
        r_pol = int(rng.integers(1, 4))
        e = gramian_error_block(tx, rx, c, t_pol, r_pol)
        r = float(np.linalg.norm(tx - rx))
        assert np.linalg.norm(e, 2) <= element_error_bound(r, c)


def test_error_block_structure_tpol3(rng):
    # for three transmit polarizations the error is exactly
    # -c1 * P_perp + c2 * Ptilde^2, giving spectral norm 2*c1*(1+eps^2)
    for _ in range(20):
        lam = 0.01
        c = PhysicalConstants(lam=lam, xi=complex(rng.normal(), rng.normal()))
        tx = np.zeros(3)
        rx = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1),
                       rng.uniform(0.3, 5.0)])
        e = gramian_error_block(tx, rx, c, 3, 3)
        d = tx - rx
        r = np.linalg.norm(d)
        uu = np.outer(d, d) / r**2
        eps = lam / (2 * np.pi * r)
        q = abs(c.xi / c.lam) ** 2
        c1 = 2 * q * eps**2 / r**2
        c2 = q * eps**2 * (1 + eps**2) / r**2
        want = -c1 * (np.eye(3) - uu) + c2 * (np.eye(3) - 3 * uu) @ (np.eye(3) - 3 * uu)
        # the subtraction inside the error block cancels ~eps^-2 digits
        noise = 5e-16 * abs(c.xi / c.lam) ** 2 / r**2
        assert np.max(np.abs(e - want)) <= 10 * noise
        assert np.linalg.norm(e, 2) == pytest.approx(2 * c1 * (1 + eps**2),
                                                     abs=10 * noise)


def test_lemma1_verify_bounds_hold():
    a = ArraySpec(delta_t=0.01, m_half=3, k_half=3, t_pol=3)
    rep = lemma1_verify(a, [0.2, -0.1, 1.0], C01, r_pol=3)
    assert rep.measured_sup_norm <= rep.bound_general
    assert rep.measured_sup_norm <= rep.bound_tpol3_tight
    # the tight three-polarization bound is attained at d_inf
    assert rep.measured_sup_norm == pytest.approx(rep.bound_tpol3_tight,
                                                  rel=1e-6)


def test_lemma1_bounds_vanish_with_distance():
    a = ArraySpec(delta_t=0.01, m_half=1, k_half=1, t_pol=3)
    b = [lemma1_verify(a, [0, 0, z], C01).bound_general
         for z in (1.0, 10.0, 100.0)]
    assert b[0] > b[1] > b[2]
    assert b[2] < 1e-5 * b[0]
