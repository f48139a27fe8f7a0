"""Finite-blocklength fundamental limits of variable-length lossless compression.

Exact optimal-code limits (excess-probability, rate, mean rate and their
prefix-code counterparts), information spectra with arbitrary-precision rank
arithmetic, Gaussian approximation bounds, random-binning error, varentropy
and source dispersion, for memoryless and Markov sources.
"""

__version__ = "0.1.0"

from . import binning, bounds, dispersion, optcode, sources, spectrum  # noqa: F401
from ._kernels import backend_name  # noqa: F401
