"""Complex-scaling spectra from Hermitian stabilization graphs (1D model)."""
__version__ = "0.1.0"
