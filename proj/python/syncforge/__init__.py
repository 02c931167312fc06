"""Tridiagonal Laplacian synthesis and synchronization experiments."""

from ._syncforge import (
    Tridiagonal,
    diffusive_feasibility,
    diffusive_laplacian,
    eigenvalues,
    largest_lyapunov,
    msf_scan,
    negative_intervals,
    place_eigenvalues,
    required_sigma,
    simulate,
    synthesize,
)

__all__ = [
    "Tridiagonal",
    "diffusive_feasibility",
    "diffusive_laplacian",
    "eigenvalues",
    "largest_lyapunov",
    "msf_scan",
    "negative_intervals",
    "place_eigenvalues",
    "required_sigma",
    "simulate",
    "synthesize",
]
