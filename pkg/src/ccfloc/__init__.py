"""Object co-localization from positive image sets.

Two stages: (1) select the kernels whose maximum responses are consistently
high across the image set and combine their maps into one activation
probability map per image; (2) propagate those activations over a
boundary-weighted superpixel graph via geodesic distances, then threshold
the resulting object-likelihood map and emit a tight bounding box.
"""

from .errors import (
    BadMagic,
    BoundaryOutOfRange,
    BoxOutOfBounds,
    CcflocError,
    DimMismatch,
    DuplicateImageId,
    ImageTooSmall,
    KernelCountMismatch,
    LengthMismatch,
    MissingFile,
    MissingResult,
    NonFiniteValue,
    NonPositiveMu,
    ParseError,
    RankOutOfRange,
    TooFewKernels,
    UnknownImageId,
    UnsupportedVersion,
)
from .evaluation import CorLocReport, corloc, iou
from .features import (
    ActivationMap,
    CcfSet,
    KernelClustering,
    build_activation_matrix,
    cluster_kernels,
    combined_activation_map,
    kernel_distance,
    load_ccf_set,
    save_ccf_set,
    select_ccfs,
    select_ccfs_top_k,
)
from .graph import SuperpixelGraph, all_pairs_geodesic, build_graph
from .propagation import (
    LocalizationResult,
    LocalizeParams,
    build_propagation_matrix,
    localize_image,
    propagate,
    rasterize_and_normalize,
    threshold_and_box,
    write_pgm,
)
from .superpixels import (
    SuperpixelLabeling,
    load_image_rgb,
    region_mean,
    rgb_to_lab,
    segment,
    upsample_bilinear,
)
from .synthetic import make_planted_dataset
from .tensor_store import (
    Box,
    DatasetManifest,
    ImageEntry,
    load_manifest,
    load_tensor,
    peek_tensor_dims,
    save_tensor,
)

__version__ = "0.1.0"
