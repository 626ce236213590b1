"""Separation of variables for cyclic representations of the 6-vertex Yang-Baxter algebra."""
__version__ = "0.1.0"
