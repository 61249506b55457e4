"""firenose: electronic-nose toolkit for incipient-fire odour classification.

Pieces: baseline-correction feature extractors over gas-sensor arrays, a
probabilistic neural network (Gaussian-kernel density) classifier with a kNN
baseline, PCA with variance accounting, accuracy-based feature ranking with
PCA fusion into a hybrid feature, fire-specific evaluation metrics, and a
seeded synthetic-data generator plus CLI tying it together.

Hot distance/kernel loops run through firenose._kernels, which picks a
compiled Cython core when available and falls back to numpy otherwise.
"""

__version__ = "0.1.0"

from . import dataset, features, knn, metrics, pca, pipeline, pnn
from ._kernels import BACKEND as KERNEL_BACKEND
from .dataset import (
    AMBIENT_NAME,
    CsvFormatError,
    LabeledDataset,
    OdourRecording,
    SplitIndices,
    SynthConfig,
    generate_synthetic,
    read_csv,
    split,
    write_csv,
)
from .features import FeatureDomainError, FeatureKind, FeatureMatrix, response_point
from .metrics import BinaryCollapse, ConfusionMatrix, RepetitionStats, UndefinedMetricError
from .pca import PcaModel
from .pipeline import PipelineConfig, PipelineReport, fuse, run
from .pnn import PnnDecision, PnnModel

__all__ = [
    "AMBIENT_NAME",
    "BinaryCollapse",
    "ConfusionMatrix",
    "CsvFormatError",
    "FeatureDomainError",
    "FeatureKind",
    "FeatureMatrix",
    "KERNEL_BACKEND",
    "LabeledDataset",
    "OdourRecording",
    "PcaModel",
    "PipelineConfig",
    "PipelineReport",
    "PnnDecision",
    "PnnModel",
    "RepetitionStats",
    "SplitIndices",
    "SynthConfig",
    "UndefinedMetricError",
    "__version__",
    "dataset",
    "features",
    "fuse",
    "generate_synthetic",
    "knn",
    "metrics",
    "pca",
    "pipeline",
    "pnn",
    "read_csv",
    "response_point",
    "run",
    "split",
    "write_csv",
]
