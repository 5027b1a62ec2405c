"""Non-Hermitian effective-Hamiltonian toolkit.

Thin Python layer over the C++ core: two-level and N-level effective
Hamiltonians, branch-point location and classification, bi-orthogonal
eigenvector continuation around parameter loops, and the resonance S matrix
with its poles, residues, and trapping behavior.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = (__doc__ or "") + "\n" + (_core_doc or "")
