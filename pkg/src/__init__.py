"""QRW Cocycles - random walk approximations of quantum stochastic cocycles."""

__version__ = "0.1.0"
