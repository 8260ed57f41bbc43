"""Deterministic toolkit turning detection layouts into location-token text
prompts, foreground re-weighting masks, and COCO-style AP reports."""

from .augment import AugmentPolicy, augment, filter_small, flip_h, shift
from .codec import (
    BoxPhrase,
    EmbeddingTable,
    TokenVocabulary,
    build_embeddings,
    corner_index,
    decode_token,
    encode_box,
    encode_corner,
    read_embedding_table,
    write_embedding_table,
)
from .detmetrics import Detection, EvalConfig, EvalReport, evaluate, iou
from .errors import (
    BinaryFormatError,
    CoordinateRangeError,
    GeopromptError,
    LayoutValidationError,
    ManifestError,
    NotEncodableError,
    PromptParseError,
    PromptTemplateError,
    ReferentialIntegrityError,
    TokenParseError,
    TokenRangeError,
)
from .geo3d import Box3D, CameraRig, box_from_pose, encode_box3d, project_corners
from .ingest import (
    ClassStats,
    DatasetManifest,
    parse_coco,
    parse_manifest,
    split_subset,
    stats,
    write_manifest,
)
from .layout import (
    SIX_CAMERA_VIEWS,
    AnnotatedBox,
    BBox2D,
    GeometricLayout,
    GridSpec,
    LocationToken,
    validate_layout,
)
from .mask import LatentBox, ReweightMask, build_mask, mask_from_file, mask_to_file, to_latent
from .prompt import PromptOptions, PromptRecord, build_prompt, parse_prompt

__version__ = "0.1.0"

__all__ = [
    "AnnotatedBox",
    "AugmentPolicy",
    "BBox2D",
    "BinaryFormatError",
    "Box3D",
    "BoxPhrase",
    "CameraRig",
    "ClassStats",
    "CoordinateRangeError",
    "DatasetManifest",
    "Detection",
    "EmbeddingTable",
    "EvalConfig",
    "EvalReport",
    "GeometricLayout",
    "GeopromptError",
    "GridSpec",
    "LatentBox",
    "LayoutValidationError",
    "LocationToken",
    "ManifestError",
    "NotEncodableError",
    "PromptOptions",
    "PromptParseError",
    "PromptRecord",
    "PromptTemplateError",
    "ReferentialIntegrityError",
    "ReweightMask",
    "SIX_CAMERA_VIEWS",
    "TokenParseError",
    "TokenRangeError",
    "TokenVocabulary",
    "augment",
    "box_from_pose",
    "build_embeddings",
    "build_mask",
    "build_prompt",
    "corner_index",
    "decode_token",
    "encode_box",
    "encode_box3d",
    "encode_corner",
    "evaluate",
    "filter_small",
    "flip_h",
    "iou",
    "mask_from_file",
    "mask_to_file",
    "parse_coco",
    "parse_manifest",
    "parse_prompt",
    "project_corners",
    "read_embedding_table",
    "shift",
    "split_subset",
    "stats",
    "to_latent",
    "validate_layout",
    "write_embedding_table",
    "write_manifest",
]
