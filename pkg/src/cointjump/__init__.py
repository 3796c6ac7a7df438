"""Dependent bivariate Poisson processes and jump-diffusion spread option pricing."""

__version__ = "0.1.0"
