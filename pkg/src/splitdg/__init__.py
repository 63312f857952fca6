"""Split-form DG spectral element method for compressible Navier-Stokes.

An entropy-stable nodal DGSEM on curvilinear hexahedral meshes: LGL
collocation with summation-by-parts operators, curl-form metric terms,
two-point entropy-conservative volume fluxes, LLF interface dissipation in
entropy variables, and BR1 viscous coupling.
"""

from splitdg.spectral import NodalBasis, build_basis

__all__ = ["NodalBasis", "build_basis"]
__version__ = "0.1.0"
