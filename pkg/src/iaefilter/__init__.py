"""Autoencoder filters for sparse matrices with auxiliary side information."""

__version__ = "0.1.0"
