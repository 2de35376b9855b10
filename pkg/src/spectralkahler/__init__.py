"""Periods, Bergman kernels, special Kähler geometry and genus-expansion
correlators of hyperelliptic and tower spectral curves."""
from .curves import HyperellipticCurve, TowerCurve, local_frames, validate_curve
from .homology import build_symplectic_frame
from .periods import period_data, abel_map, j_invariant
from .bergman import make_kernel, bergman_eval, bergman_jets, KleinKernel, ThetaKernel
from .recursion import RecursionEngine, recurse, w03_eval, w04_eval
from .skgeom import sk_data, cubic_residue, quartic_residue, kahler_identities
from .family import FamilyChart, fd_tau, rauch_check, variational_check
from .errors import SpectralKahlerError

__all__ = [
    "HyperellipticCurve", "TowerCurve", "local_frames", "validate_curve",
    "build_symplectic_frame", "period_data", "abel_map", "j_invariant",
    "make_kernel", "bergman_eval", "bergman_jets", "KleinKernel", "ThetaKernel",
    "RecursionEngine", "recurse", "w03_eval", "w04_eval",
    "sk_data", "cubic_residue", "quartic_residue", "kahler_identities",
    "FamilyChart", "fd_tau", "rauch_check", "variational_check",
    "SpectralKahlerError",
]
