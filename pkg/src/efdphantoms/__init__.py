"""Cell phantom videos as elliptical Fourier descriptor time series."""
__version__ = "0.1.0"

from .kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
