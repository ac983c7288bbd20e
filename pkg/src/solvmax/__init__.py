"""Sub-Riemannian geodesics, pendulum periods and Maxwell strata on regular solvable 3D Lie groups."""

__version__ = "0.1.0"
