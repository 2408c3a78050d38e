"""Fingerprint membership verification via a PCA eigenspace over edge maps.

Pipeline: ingest a labeled grayscale database, optionally reduce each image
to a binary edge map, build the eigenspace with the small-matrix trick,
project probes, and decide membership from the h statistic with a three-way
accept / reject / inconclusive band. Evaluation utilities sweep thresholds
into ROC curves under seeded Gaussian noise.
"""

from .classifier import (
    DECISION_MODES,
    DecisionConfig,
    DegenerateSpaceError,
    Verdict,
    VerificationReport,
    auto_epsilon_d,
    decide_h,
    decide_legacy,
    euclidean,
    h_value,
    mahalanobis,
    theta_l,
    verify,
)
from .edges import (
    EDGE_METHODS,
    EdgeConfig,
    EdgeMap,
    apply_edge_stage,
    canny_edges,
    sobel_edges,
    sobel_gradients,
)
from .eigenspace import (
    RANK_TOLERANCE,
    EigenSolverError,
    EigenSpace,
    Projection,
    build_space,
    center,
    compute_mean,
    effective_rank_of,
    eig_symmetric,
    project,
    reduced_covariance,
    train,
    train_matrix,
)
from .evaluation import (
    NOISE_LEVEL_NAMES,
    NOISE_LEVELS,
    HScanRow,
    LabeledTestSet,
    NoiseLevel,
    RocPoint,
    TestEntry,
    confusion_counts,
    csv_metadata,
    h_scan,
    h_scan_csv,
    make_noise_level,
    roc_csv,
    roc_sweep,
    split_database,
    threshold_grid,
)
from .imaging import (
    GENERATOR_NAME,
    FingerprintDatabase,
    GrayImage,
    ImageFormatError,
    ImageLabel,
    ImageVector,
    NoiseSpec,
    add_gaussian_noise,
    database_from_images,
    gaussian_field,
    image_from_vector,
    ingest_database,
    load_image,
    vectorize,
    write_pgm,
)
from .persistence import (
    FileFormatError,
    atomic_write_bytes,
    load_database,
    load_space,
    save_database,
    save_space,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # imaging
    "GrayImage",
    "ImageVector",
    "ImageLabel",
    "FingerprintDatabase",
    "NoiseSpec",
    "ImageFormatError",
    "GENERATOR_NAME",
    "load_image",
    "write_pgm",
    "vectorize",
    "image_from_vector",
    "database_from_images",
    "ingest_database",
    "gaussian_field",
    "add_gaussian_noise",
    # edges
    "EDGE_METHODS",
    "EdgeConfig",
    "EdgeMap",
    "sobel_gradients",
    "sobel_edges",
    "canny_edges",
    "apply_edge_stage",
    # eigenspace
    "EigenSpace",
    "Projection",
    "EigenSolverError",
    "RANK_TOLERANCE",
    "compute_mean",
    "center",
    "reduced_covariance",
    "eig_symmetric",
    "build_space",
    "train_matrix",
    "effective_rank_of",
    "train",
    "project",
    # classifier
    "Verdict",
    "DecisionConfig",
    "VerificationReport",
    "DegenerateSpaceError",
    "DECISION_MODES",
    "euclidean",
    "mahalanobis",
    "theta_l",
    "h_value",
    "auto_epsilon_d",
    "decide_h",
    "decide_legacy",
    "verify",
    # evaluation
    "NOISE_LEVELS",
    "NOISE_LEVEL_NAMES",
    "NoiseLevel",
    "TestEntry",
    "LabeledTestSet",
    "HScanRow",
    "RocPoint",
    "make_noise_level",
    "split_database",
    "h_scan",
    "confusion_counts",
    "csv_metadata",
    "threshold_grid",
    "roc_sweep",
    "h_scan_csv",
    "roc_csv",
    # persistence
    "FileFormatError",
    "atomic_write_bytes",
    "save_space",
    "load_space",
    "save_database",
    "load_database",
]
