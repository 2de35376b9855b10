import itertools

import numpy as np
import pytest
import sympy as sp

from spectralkahler import bergman as bg
from spectralkahler.errors import JetOrderError
from spectralkahler.recursion import (RecursionEngine, a_cycle_check, b_contraction, full_b_contraction,
                                      recurse, recursion_base, residue_check, slot_count, w03_eval, w04_eval)

import genus0_oracle as oracle
from conftest import sample_points

ZS = [sp.Rational(3, 2) + sp.I / 3, -sp.Rational(2, 3) + sp.Rational(5, 4) * sp.I,
      sp.Rational(1, 3) - sp.Rational(7, 5) * sp.I, -sp.Rational(9, 4) - sp.I / 2,
      sp.Rational(4, 5) + 2 * sp.I]


def zpoint(z):
    z = complex(z)
    return ((z + 1 / z) / 2, np.array([(z - 1 / z) / 2]))


@pytest.mark.parametrize("g,n", [(0, 3), (0, 4), (1, 1), (1, 2), pytest.param(0, 5, marks=pytest.mark.slow)])
def test_genus0_matches_exact_oracle(conic, g, n):
    zs = ZS[:n]
    ref = oracle.W_dx(g, zs)
    val = conic.engine.evaluate(g, n, [zpoint(z) for z in zs])
    assert abs(val - ref) <= 1e-9 * abs(ref)


def test_slot_count():
    assert slot_count(0, 3) == 1
    assert slot_count(1, 1) == 2
    assert slot_count(2, 1) == 5


def test_base_cases(sextic):
    w01, w02 = recursion_base(sextic.kernel)
    p, r = sample_points(sextic.model, 2, seed=1)
    assert w01(p) == 0
    assert w02(p, r) == sextic.kernel(*p, *r)
    with pytest.raises(ValueError):
        sextic.engine.get(0, 2)


@pytest.mark.parametrize("name", ["legendre", "sextic"])
def test_closed_forms(name, request):
    c = request.getfixturevalue(name)
    E = c.engine
    pts = sample_points(c.model, 4, seed=21)
    v3, w3 = E.evaluate(0, 3, pts[:3]), w03_eval(E, *pts[:3])
    assert abs(v3 - w3) <= 1e-8 * abs(w3)
    v4, w4 = E.evaluate(0, 4, pts), w04_eval(E, *pts)
    assert abs(v4 - w4) <= 1e-8 * abs(w4)


STABLE = [(g, n) for g in range(3) for n in range(1, 6) if 0 < 2 * g - 2 + n <= 3]


@pytest.mark.parametrize("g,n", STABLE)
def test_structural_properties(legendre, g, n):
    E = legendre.engine
    c = recurse(E, g, n)
    assert c.asymmetry < 1e-8
    assert c.odd_defect < 1e-8
    assert c.permuted_defect() < 1e-14
    pts = sample_points(legendre.model, n + 1, seed=31)
    assert residue_check(E, c, pts[:n]) < 1e-8
    a = a_cycle_check(E, c, pts[1:n])
    assert np.max(np.abs(a)) < 1e-9 * max(1.0, abs(E.evaluate(g, n, pts[:n])))
    # symmetry of values under permuting the points
    if n > 1:
        vals = [E.evaluate(g, n, list(perm)) for perm in itertools.permutations(pts[:n])]
        assert np.ptp(np.abs(vals)) < 1e-10 * abs(vals[0])


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1), (0, 4), (1, 2)])
def test_genus2_structural(sextic, g, n):
    E = sextic.engine
    c = E.get(g, n)
    pts = sample_points(sextic.model, n, seed=41)
    assert c.asymmetry < 1e-8 and c.odd_defect < 1e-8
    assert residue_check(E, c, pts) < 1e-8


def test_branch_flip_invariance(legendre):
    """Changing q -> -q at one ramification point must not change W."""
    E = legendre.engine
    F = RecursionEngine(E.jets.flipped(2), E.kernel, E.model, E.pd)
    pts = sample_points(legendre.model, 3, seed=5)
    for g, n in ((0, 3), (1, 1), (1, 2)):
        v, w = E.evaluate(g, n, pts[:n]), F.evaluate(g, n, pts[:n])
        assert abs(v - w) <= 1e-12 * abs(v)


def test_b_integrals_analytic_vs_numeric(legendre):
    E = legendre.engine
    an = E.xi_b_integrals(2)
    nu = E.xi_b_integrals_numeric(2)
    assert np.max(np.abs(an - nu)) < 1e-9 * np.max(np.abs(an))
    assert np.max(np.abs(E.xi_a_integrals(2))) < 1e-9


def test_full_b_contraction_is_cubic(generic_g2):
    """Triple b-integral of W(0,3) equals -(2 pi i)^2 times the cubic tensor."""
    from spectralkahler.skgeom import cubic_residue
    E = generic_g2.engine
    T = full_b_contraction(E, E.get(0, 3))
    assert T.shape == (2, 2, 2)
    c = cubic_residue(generic_g2.model, generic_g2.frame, generic_g2.jets)
    assert np.max(np.abs(T + (2j * np.pi) ** 2 * c)) < 1e-10 * np.max(np.abs(T))
    b = b_contraction(E, E.get(0, 3), sample_points(generic_g2.model, 2, seed=2))
    assert b.shape == (2,)


def test_insufficient_jet_order_raises(legendre):
    jets = bg.bergman_jets(legendre.model, legendre.pd, legendre.kernel, order=6)
    E = RecursionEngine(jets, legendre.kernel, legendre.model, legendre.pd)
    E.get(0, 3)
    with pytest.raises(JetOrderError):
        E.get(1, 3)


def test_thread_count_does_not_change_results(legendre, monkeypatch):
    pts = sample_points(legendre.model, 2, seed=8)
    ref = legendre.engine.evaluate(1, 2, pts)
    monkeypatch.setenv("SK_RECURSION_THREADS", "4")
    E = RecursionEngine(legendre.jets, legendre.kernel, legendre.model, legendre.pd)
    assert E.evaluate(1, 2, pts) == ref


def test_correlator_json(legendre):
    d = legendre.engine.get(0, 3).to_json(tol=1e-14)
    assert d["g"] == 0 and d["n"] == 3 and d["K"] == 1
    assert all(len(e["slots"]) == 3 for e in d["entries"])
