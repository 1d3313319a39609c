"""quiverpot: exact-arithmetic computations with quiver algebras and potentials.

Modules:
    exactalg     exact linear algebra over Q and prime fields
    quiverpath   quivers, paths, the path algebra and its grading
    potentials   cycle classes, cyclic symmetrisation and derivatives
    vacualgebra  graded quotient algebras, the bimodule complex, CY checks
    pbwengine    filtered deformation data, PBW conditions, reconstruction
    zoo          generators for the documented example families
    cli          text format, command dispatch, reports
"""

__version__ = "0.1.0"
