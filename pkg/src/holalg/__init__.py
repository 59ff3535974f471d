"""Chart-level computer algebra for holomorphic Lie algebroids and Poisson structures."""

__version__ = "0.1.0"
