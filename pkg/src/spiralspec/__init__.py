"""Spectral analysis of wave trains and spiral waves in two-component
reaction-diffusion systems with small slow-variable diffusion."""

__version__ = "0.1.0"
