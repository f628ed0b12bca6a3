"""Representation zeta functions of split extensions of congruence subgroups.

Three independent routes to the same numbers: closed-form catalog formulas,
certified p-adic integration of minor sets, and brute-force orbit counting
over finite quotients.
"""

__version__ = "0.1.0"

from . import catalog, integral, lattice, minors, oracle, polyring  # noqa: F401
