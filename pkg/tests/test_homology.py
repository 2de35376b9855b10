import numpy as np

from spectralkahler.homology import (Cycle, build_symplectic_frame, intersection_matrix,
                                     standard_symplectic, symplectic_reduction)
from spectralkahler.periods import integrate_track


def test_frame_is_symplectic(legendre, sextic, tower):
    for c in (legendre, sextic, tower):
        fr = c.frame
        assert fr.check()
        assert fr.genus == c.model.genus
        assert np.array_equal(fr.U @ fr.M @ fr.U.T, standard_symplectic(fr.genus))


def test_intersection_matrix_antisymmetric(sextic):
    fr = sextic.frame
    M = intersection_matrix(sextic.model, fr.cycles, 0.2 * fr.radius)
    assert np.array_equal(M, -M.T)
    assert np.array_equal(M, fr.M)


def test_cycles_close_and_exact_forms_integrate_to_zero(sextic):
    model = sextic.model
    for c in sextic.frame.cycles:
        tr = c.track(model)
        assert np.allclose(tr.end_fiber, tr.start_fiber)
        # d(x^2 y) is exact
        val = integrate_track(tr, lambda x, f: 2 * x * f[0] + x ** 2 * np.polyval(
            np.polyder(model.Q[::-1]), x) / (2 * f[0]))
        assert abs(val) < 1e-11


def test_cycle_json_roundtrip(legendre):
    c = legendre.frame.cycles[0]
    d = Cycle.from_json(c.to_json())
    a1 = integrate_track(c.track(legendre.model), legendre.model.holomorphic_basis)
    a2 = integrate_track(d.track(legendre.model), legendre.model.holomorphic_basis)
    assert np.allclose(a1, a2, atol=1e-14)


def test_symplectic_reduction_of_conjugated_form():
    J = standard_symplectic(2)
    A = np.array([[1, 2, 0, 1], [0, 1, 1, 0], [0, 0, 1, 3], [1, 2, 0, 2]])
    assert round(abs(np.linalg.det(A))) == 1
    M = A @ J @ A.T
    U = symplectic_reduction(M)
    assert np.array_equal(U @ M @ U.T, J)


def test_frame_with_hints(legendre):
    hint = legendre.frame.cycles[0]
    fr = build_symplectic_frame(legendre.model, [hint])
    assert fr.check()
