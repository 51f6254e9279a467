"""PAPR and crest-factor statistics of sampled I/Q white Gaussian noise."""

__version__ = "0.1.0"
