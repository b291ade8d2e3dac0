"""Ensemble-learning benchmark for daily weather classification.

Reimplements six classifier families (CART, AdaBoost, gradient boosting,
random forest, MLP, KNN, plus stacked combinations) from first principles
and benchmarks them on NASA POWER daily point data.
"""

from .cart import DecisionTree, TreeParams, fit_cart, gini_impurity, predict_cart
from .ensembles import (
    AdaBoostModel,
    ForestModel,
    GbmModel,
    fit_adaboost,
    fit_forest,
    fit_gbm,
    predict_adaboost,
    predict_forest,
    predict_gbm,
)
from .ingest import (
    FEATURE_NAMES,
    WeatherRecord,
    WeatherTable,
    clean_missing,
    fetch_power_daily,
    parse_power_csv,
    serialize_power_csv,
)
from .learners import (
    KnnModel,
    MlpModel,
    fit_knn,
    gradient_check,
    init_mlp,
    predict_knn,
    predict_mlp,
    train_mlp,
)
from .metrics import ConfusionMatrix, ScoreReport, classification_scores, confusion_matrix
from .preprocess import (
    LabeledDataset,
    PrecipClasses,
    ScalerParams,
    SplitIndices,
    TempQuantiles,
    apply_minmax,
    build_labeled_dataset,
    discretize_target,
    fit_minmax,
    invert_minmax,
    select_features,
    split_train_test,
)
from .stacking import StackingModel, StackingSpec, fit_stacking, oof_meta_features, predict_stacking

__version__ = "0.1.0"
