"""Oblique decision tree ensembles: SVM-split trees with bagging.

Thin Python wrapper around the C++ core.  The main entry points are
:func:`load_csv`, :func:`fit`, :func:`load_model`, :func:`cross_validate`,
and :func:`compare`.
"""

from ._core import (
    Dataset,
    Ensemble,
    compare,
    cross_validate,
    fit,
    load_csv,
    load_model,
)

__all__ = [
    "Dataset",
    "Ensemble",
    "compare",
    "cross_validate",
    "fit",
    "load_csv",
    "load_model",
]
