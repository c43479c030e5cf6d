"""Mirror-side stability computations for toric and low-degree del Pezzo surfaces.

Modules: ``surface_geometry`` (exact intersection theory), ``exp_laurent``
(exponential-rate Laurent arithmetic), ``lg_mirror`` (theta functions and
potentials), ``critical_solver`` (tropical asymptotics and refinement),
``stability_engine`` (residue sums, slopes, Futaki terms) and ``cli``.
"""

from . import precision  # noqa: F401  (sets the default working precision)

__version__ = "0.1.0"
