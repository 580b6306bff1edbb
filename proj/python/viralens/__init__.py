from ._viralens import (
    Model,
    ViralensError,
    ingest,
    kmeans,
    pooled_t_test,
    rgb_to_hsv,
    singular_values,
    t_cdf,
    t_quantile,
    train,
)

__all__ = [
    "Model",
    "ViralensError",
    "ingest",
    "kmeans",
    "pooled_t_test",
    "rgb_to_hsv",
    "singular_values",
    "t_cdf",
    "t_quantile",
    "train",
]
