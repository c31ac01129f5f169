from .mesh import BoundaryMesh, CurveMesh, MeshControls, build_mesh
from .nystrom import (FieldSolution, GapGradient, SceneOperator,
                      max_gap_gradient, solve_h, solve_hc, solve_u)
from .fields import (Decomposition, InteriorOperator, Representation,
                     decompose_u, representation_coeffs)
