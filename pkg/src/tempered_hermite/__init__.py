"""Tempered Hermite fields on the plane: kernels, covariance, samplers,
tempered fractional calculus and Wiener integration."""

__version__ = "0.1.0"
