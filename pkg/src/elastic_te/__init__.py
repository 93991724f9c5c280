"""Elastic transmission eigenvalues and eigenmodes on the unit disk and ball."""

__version__ = "0.1.0"

from .params import LameParameters, Wavenumbers, wavenumbers  # noqa: E402

__all__ = ["LameParameters", "Wavenumbers", "wavenumbers", "__version__"]
