"""Model geometries: the CR sphere and the Reinhardt hypersurface."""

from .chart import Chart, get_chart
from .pluriharmonic import sphere_pluriharmonic
from .quadrature import QuadratureSpec, ReinhardtQuadrature, SphereQuadrature
from .reinhardt import reinhardt_chart
from .sphere import sphere_chart

__all__ = [
    "Chart", "get_chart", "sphere_chart", "reinhardt_chart",
    "QuadratureSpec", "SphereQuadrature", "ReinhardtQuadrature",
    "sphere_pluriharmonic",
]
