"""radvis: spatial radiation-field visualization and exposure simulation."""

from .backend import active_backend
from .camera import Camera
from .encoding import ColorLut, EncodingSpec, load_viridis, make_spec
from .field import IntensityRange, RadiationSource, default_range, dose_rate
from .mesh import TriMesh, load_mesh
from .raster import Frame, bake_floor_texture, billboard_overlay, render, shade_fragment

__version__ = "0.1.0"

__all__ = [
    "active_backend",
    "Camera",
    "ColorLut",
    "EncodingSpec",
    "load_viridis",
    "make_spec",
    "IntensityRange",
    "RadiationSource",
    "default_range",
    "dose_rate",
    "TriMesh",
    "load_mesh",
    "Frame",
    "bake_floor_texture",
    "billboard_overlay",
    "render",
    "shade_fragment",
    "__version__",
]
