"""Steady states, energy hierarchy and a structure-preserving solver for the
one-dimensional Keller-Segel model with volume-filling nonlinear diffusion."""

from .core import Field, Grid, ModelParams, critical_chi, make_grid, project
from .errors import (
    BranchNotPresentError,
    ConfigurationError,
    DomainError,
    IntegrationError,
    KSError,
    NoRootError,
)

__version__ = "0.1.0"

__all__ = [
    "BranchNotPresentError",
    "ConfigurationError",
    "DomainError",
    "Field",
    "Grid",
    "IntegrationError",
    "KSError",
    "ModelParams",
    "NoRootError",
    "critical_chi",
    "make_grid",
    "project",
]
