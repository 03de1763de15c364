"""Site-specific indoor radio propagation: scenes, image-method ray tracing,
channel responses and coverage planning."""

__version__ = "0.1.0"

from .channel import (
    ChannelError,
    ChannelImpulseResponse,
    PowerDelayProfile,
    TappedDelayLine,
    ToAReport,
    build_cir,
    build_pdp,
    build_tdl,
    compare_materials,
    verify_toa,
)
from .coverage import (
    DEFAULT_THRESHOLD_DB,
    CoverageError,
    CoverageMap,
    GridSpec,
    HoleRegion,
    PlacementResult,
    detect_holes,
    optimize_tx,
    sweep,
)
from .estimator import PropagationModel
from .materials import DEFAULT_MATERIALS, Material, MaterialError
from .scene import Box, Point3, Scene, SceneError, Surface, make_box, ray_surface_intersect, validate_scene
from .scene_format import SceneParseError, parse_scene, serialize_scene
from .tracer import Interaction, PropagationPath, TraceConfig, TraceError, enumerate_images, trace

__all__ = [name for name in dir() if not name.startswith("_")]
