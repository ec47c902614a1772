"""Angular Radial Bins (ARB) shape descriptors for real-time silhouette matching."""

from .arb import (
    ArbConfig,
    ArbDescriptor,
    OrientationMode,
    OverlappingArbDescriptor,
    WeightMode,
    compute_accumulative_arb,
    compute_overlapping_arb,
    compute_simple_arb,
    describe_arb,
    fourier_magnitude_descriptor,
    orient_start_angle,
)
from .geometry import Contour, MomentSet, compute_moments, furthest_contour_point, trace_contour
from .imgio import BinaryImage, Dataset, generate_synthetic_dataset, load_dataset, load_image, resize_to
from .match import DescriptorIndex, l2_distance, nearest
from .methods import Method

__version__ = "0.1.0"
