"""Universal 1RDM functionals of the generalized Hubbard dimer."""

__version__ = "0.1.0"
