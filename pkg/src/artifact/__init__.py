"""Numerical engine for a two-time singularly perturbed nonlinear PDE family.

The pipeline validates an instance, solves the Borel-plane convolution
equation by Picard iteration, evaluates the analytic solutions through a
double Laplace and inverse Fourier transform, and measures the Gevrey and
exponential-flatness structure of the resulting solution family.
"""

__version__ = "0.1.0"
