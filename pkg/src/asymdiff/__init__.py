"""Diffusion adaptive filters with asymmetric error costs over sensor networks."""

__version__ = "0.1.0"
