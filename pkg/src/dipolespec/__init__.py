"""Spectral quantities of Schrodinger operators with dipole-type potentials.

Subpackages by concern: `angular` (sphere eigenproblem), `hardy` (best
constants and critical couplings), `exponents` (characteristic exponents),
`radial` (Volterra mode solver), `asymptotics` (solution fields and limit
functionals), `brezis_kato` (bootstrap constants), `cli` (batch front end).
"""

__version__ = "0.1.0"
