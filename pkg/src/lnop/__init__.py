"""Neural operators with learnable factorized transforms, plus a truncated-DFT baseline."""

__version__ = "0.1.0"
