"""Darboux transformations of the one-dimensional Dirac equation.

Modules: ``pauli`` (2x2 algebra), ``dirac_core`` (operator and RK4
solutions), ``darboux`` (one-fold transformation), ``cavity`` (Rabi control),
``transistor`` (gate synthesis) and ``cli``.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
