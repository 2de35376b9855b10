import mpmath as mp
import numpy as np
import pytest

from spectralkahler import bergman as bg
from spectralkahler.periods import abel_map

from conftest import sample_points


def torus_kernel(u, tau):
    """-d^2/du^2 log theta_1(pi u | tau): the a-normalised kernel in the u-chart."""
    q = mp.exp(1j * mp.pi * mp.mpc(tau))
    z = mp.pi * mp.mpc(u)
    t0 = mp.jtheta(1, z, q)
    t1 = mp.jtheta(1, z, q, 1)
    t2 = mp.jtheta(1, z, q, 2)
    return complex(-mp.pi ** 2 * (t2 * t0 - t1 ** 2) / t0 ** 2)


@pytest.mark.parametrize("name", ["quartic_roots", "legendre"])
def test_torus_kernel_oracle(name, request):
    c = request.getfixturevalue(name)
    pts = sample_points(c.model, 6, seed=11)
    for p, r in zip(pts[:3], pts[3:]):
        u = abel_map(c.model, p, r, c.pd)[0]
        om = c.pd.omega(np.asarray(p[0]), p[1])[0] * c.pd.omega(np.asarray(r[0]), r[1])[0]
        ref = torus_kernel(u, c.pd.tau[0, 0]) * om
        assert abs(c.kernel(*p, *r) - ref) <= 1e-8 * abs(ref)


def test_klein_and_theta_agree(sextic, generic_g2):
    for c in (sextic, generic_g2):
        th = bg.ThetaKernel(c.model, c.pd)
        for p, r in zip(*[iter(sample_points(c.model, 6, seed=3))] * 2):
            k1, k2 = c.kernel(*p, *r), th(*p, *r)
            assert abs(k1 - k2) <= 1e-8 * abs(k1)


def test_kernel_symmetry_and_double_pole(sextic):
    k = sextic.kernel
    p, r = sample_points(sextic.model, 2, seed=5)
    assert abs(k(*p, *r) - k(*r, *p)) < 1e-12 * abs(k(*p, *r))
    # B ~ dx1 dx2 / (x1 - x2)^2 on the same sheet
    x1 = p[0]
    for eps in (1e-3, 1e-4):
        x2 = x1 + eps
        f2 = sextic.model.nearest_fiber(x2, p[1])
        assert abs(k(x1, p[1], x2, f2) * eps ** 2 - 1) < 10 * eps


def test_cycle_identities(legendre, sextic):
    for c in (legendre, sextic):
        for p in sample_points(c.model, 2, seed=7):
            a, b = bg.cycle_identity_check(c.kernel, c.pd, p)
            assert a < 1e-9
            assert b < 1e-8


def test_no_residue_at_infinity(sextic):
    p = sample_points(sextic.model, 1, seed=9)[0]
    assert np.max(np.abs(bg.infinity_check(sextic.kernel, sextic.model, p))) < 1e-10


def test_jets_symmetric_and_consistent(sextic):
    J = sextic.jets
    assert J.symmetry_defect() < 1e-12
    assert J.residual < 1e-10
    assert J.T.shape == (6, 6, J.order, J.order)


def test_projective_connection_cross_check(legendre):
    J = legendre.jets
    for a, fr in enumerate(J.frames):
        sb, err = bg.projective_connection_richardson(legendre.kernel, legendre.model, legendre.pd, fr)
        assert abs(sb - J.S_B[a]) < 1e-6 * max(1.0, abs(sb))


def test_flip_is_an_involution(legendre):
    J = legendre.jets
    back = J.flipped(1).flipped(1)
    assert np.allclose(back.T, J.T) and np.allclose(back.omega, J.omega)
    # the regular part on the diagonal is even in (q1, q2) jointly
    F = J.flipped(1)
    assert np.allclose(F.T[1, 1], J.T[1, 1] * np.outer((-1.0) ** np.arange(J.order), (-1.0) ** np.arange(J.order)))


def test_genus0_kernel_is_rational(conic):
    # x = (z + 1/z)/2: B = dz1 dz2 / (z1 - z2)^2
    z1, z2 = 1.3 + 0.4j, -0.7 + 1.1j
    x = lambda z: (z + 1 / z) / 2
    y = lambda z: (z - 1 / z) / 2
    dx = lambda z: (1 - 1 / z ** 2) / 2
    ref = 1 / (z1 - z2) ** 2 / (dx(z1) * dx(z2))
    assert abs(conic.kernel(x(z1), [y(z1)], x(z2), [y(z2)]) - ref) < 1e-13 * abs(ref)


def two_eta1(tau):
    """Regular part of -d^2 log theta_1(pi u) at u = 0 (equals 2 eta_1)."""
    q = mp.exp(1j * mp.pi * mp.mpc(tau))
    return complex(-mp.pi ** 2 * mp.jtheta(1, 0, q, 3) / (3 * mp.jtheta(1, 0, q, 1)))


@pytest.mark.parametrize("name", ["quartic_roots", "legendre"])
def test_projective_connection_torus_oracle(name, request):
    """S_B in the flat chart is 6 * 2 eta_1; transported to q by S = S_u u'^2 + {u; q}."""
    c = request.getfixturevalue(name)
    J = c.jets
    s_flat = 6 * two_eta1(c.pd.tau[0, 0])
    for a in range(J.nram):
        # omega jets are the Taylor coefficients of u'(q)
        u1, u2, u3 = J.omega[a, 0, 0], J.omega[a, 0, 1], 2 * J.omega[a, 0, 2]
        schwarz = u3 / u1 - 1.5 * (u2 / u1) ** 2
        ref = s_flat * u1 ** 2 + schwarz
        assert abs(J.S_B[a] - ref) <= 1e-7 * max(1.0, abs(ref))
