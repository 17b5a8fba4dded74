"""Sparse DCT image codec, sequence likelihoods and generation plans."""

from ._dctf import *  # noqa: F401,F403
from ._dctf import Error, FormatError, ZeroProbabilityError  # noqa: F401

__version__ = "0.1.0"
