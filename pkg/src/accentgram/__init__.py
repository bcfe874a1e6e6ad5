"""Two-group speech-feature analysis toolkit.

Extracts mel-frequency cepstral coefficients from labeled WAV recordings,
compares the groups with a univariate and multivariate statistical battery,
and contrasts full-feature against reduced-feature Random Forest
classifiers. Everything is seeded and deterministic; the `accentgram` CLI
drives the pipeline end to end.
"""

__version__ = "0.1.0"

from .audio_io import AudioClip, WavFormatError, load_wav
from .dataset import SpeakerRecord, read_features_csv, write_features_csv
from .errors import DataError, NumericalError
from .forest import (
    ClassifierEval,
    ForestConfig,
    ForestModel,
    McNemarResult,
    ModelComparison,
    SplitPlan,
    compare_models,
    evaluate,
    fit_forest,
    gini,
    mcnemar,
    predict,
    repeated_compare,
    stratified_split,
    wilson_ci,
)
from .mfcc import MfccConfig, MfccMatrix, extract_mfcc, pool_mean
from .multivariate import (
    BoxMResult,
    CdaResult,
    ManovaResult,
    PillaiResult,
    box_m,
    cda,
    pillai_manova,
    run_manova,
    scatter_matrices,
)
from .pipeline import Manifest, RunConfig, load_manifest, run_all
from .univariate import (
    FeatureTestReport,
    GroupSample,
    NormalityReport,
    TTestRow,
    VarianceTestResult,
    bonferroni_threshold,
    cohens_d,
    ks_lilliefors,
    levene,
    run_feature_tests,
    shapiro_wilk,
    t_test,
    t_test_from_stats,
)

__all__ = [
    "__version__",
    "AudioClip",
    "WavFormatError",
    "load_wav",
    "SpeakerRecord",
    "read_features_csv",
    "write_features_csv",
    "DataError",
    "NumericalError",
    "ClassifierEval",
    "ForestConfig",
    "ForestModel",
    "McNemarResult",
    "ModelComparison",
    "SplitPlan",
    "compare_models",
    "evaluate",
    "fit_forest",
    "gini",
    "mcnemar",
    "predict",
    "repeated_compare",
    "stratified_split",
    "wilson_ci",
    "MfccConfig",
    "MfccMatrix",
    "extract_mfcc",
    "pool_mean",
    "BoxMResult",
    "CdaResult",
    "ManovaResult",
    "PillaiResult",
    "box_m",
    "cda",
    "pillai_manova",
    "run_manova",
    "scatter_matrices",
    "Manifest",
    "RunConfig",
    "load_manifest",
    "run_all",
    "FeatureTestReport",
    "GroupSample",
    "NormalityReport",
    "TTestRow",
    "VarianceTestResult",
    "bonferroni_threshold",
    "cohens_d",
    "ks_lilliefors",
    "levene",
    "run_feature_tests",
    "shapiro_wilk",
    "t_test",
    "t_test_from_stats",
]
