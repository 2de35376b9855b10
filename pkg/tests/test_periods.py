import mpmath as mp
import numpy as np
import pytest

from spectralkahler.curves import HyperellipticCurve
from spectralkahler.periods import abel_map, j_invariant, lattice_reduce, modular_reduce, period_data


def j_theta_oracle(tau):
    """j from Jacobi theta constants (mpmath), independent of the q-series code."""
    q = mp.exp(1j * mp.pi * mp.mpc(tau))
    t2, t3, t4 = (mp.jtheta(k, 0, q) for k in (2, 3, 4))
    return complex(32 * (t2 ** 8 + t3 ** 8 + t4 ** 8) ** 3 / (t2 * t3 * t4) ** 8)


def j_cross_ratio(roots):
    e1, e2, e3, e4 = roots
    lam = (e3 - e1) * (e4 - e2) / ((e3 - e2) * (e4 - e1))
    return 256 * (lam ** 2 - lam + 1) ** 3 / (lam ** 2 * (lam - 1) ** 2)


@pytest.mark.parametrize("tau", [1j, 0.5 + 0.866j, 0.31 + 1.7j, -0.4 + 0.6j, 2.2 + 0.15j])
def test_j_invariant_matches_theta_constants(tau):
    ref = j_theta_oracle(modular_reduce(tau))
    assert abs(j_invariant(tau) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_modular_reduce_lands_in_fundamental_domain():
    t = modular_reduce(3.7 + 0.05j)
    assert abs(t.real) <= 0.5 + 1e-12 and abs(t) >= 1 - 1e-12


def test_period_sanity(legendre, sextic, generic_g2):
    for c in (legendre, sextic, generic_g2):
        pd = c.pd
        assert pd.asymmetry < 1e-10
        assert np.all(np.linalg.eigvalsh(pd.tau.imag) > 0)
        assert pd.normalization_error < 1e-10


def test_square_lattice_j(quartic_roots):
    assert abs(j_invariant(quartic_roots.pd.tau[0, 0]) - 1728) < 1e-8


@pytest.mark.parametrize("Q", [[4, 0, -5, 0, 1], [0.3 - 1j, 2, 0.5j, -1, 1]])
def test_genus1_j_against_cross_ratio(Q):
    from spectralkahler.homology import build_symplectic_frame
    m = HyperellipticCurve(Q)
    pd = period_data(m, build_symplectic_frame(m))
    ref = j_cross_ratio(np.roots(np.asarray(Q)[::-1]))
    assert abs(j_invariant(pd.tau[0, 0]) - ref) <= 1e-8 * abs(ref)


def test_genus0_period_data_is_empty(conic):
    pd = conic.pd
    assert pd.genus == 0 and pd.tau.shape == (0, 0)


def test_abel_map_is_additive_mod_lattice(sextic):
    m, pd = sextic.model, sextic.pd
    pts = [(x, m.fiber_candidates(x)[k]) for x, k in ((0.3 + 0.4j, 0), (-0.6 + 0.2j, 1), (0.2 - 0.9j, 0))]
    assert np.allclose(abel_map(m, pts[0], pts[0], pd), 0)
    a = abel_map(m, pts[0], pts[1], pd) + abel_map(m, pts[1], pts[2], pd)
    b = abel_map(m, pts[0], pts[2], pd)
    r, _, _ = lattice_reduce(a - b, pd.tau)
    assert np.max(np.abs(r)) < 1e-10


def test_cycle_integrals_of_normalised_forms(sextic):
    pd = sextic.pd
    a, b = pd.cycle_integrals(pd.omega)
    assert np.allclose(a.T, np.eye(2), atol=1e-12)
    assert np.allclose(b.T, pd.tau, atol=1e-12)
