"""Projection method for incompressible Navier-Stokes with a total-pressure boundary condition."""

from .fem import FeSystem, Field, FieldKind, build_dof_map
from .manufactured import SectorProblem
from .mesh import TriMesh, generate_sector_mesh
from .scheme import ProblemData, ProjectionScheme, SchemeConfig
from .verification import convergence_study, fit_slope, property_suite

__all__ = [
    "FeSystem",
    "Field",
    "FieldKind",
    "ProblemData",
    "ProjectionScheme",
    "SchemeConfig",
    "SectorProblem",
    "TriMesh",
    "build_dof_map",
    "convergence_study",
    "fit_slope",
    "generate_sector_mesh",
    "property_suite",
]
