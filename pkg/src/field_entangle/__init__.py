"""
Field Entangle - perturbative Rényi entanglement entropy between interacting scalar fields.

This package provides:
- O(lambda^2) Rényi entropies of the linear sigma model (unbroken and broken phases)
- Radial, half-space Monte Carlo and momentum-space evaluations of the replica integrals
- An exact Gaussian lattice oracle for two bilinearly coupled fields
- A CLI that writes JSON/CSV result records
"""

__version__ = "0.1.0"
