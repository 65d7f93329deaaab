"""Concordance signatures of copulas.

Functions taking or returning structured documents use the same JSON shapes
as the CLI and the HTTP service; here they are plain dicts.
"""

import json as _json

import numpy as _np

from . import _core
from ._core import (
    ConcordanceError,
    amatrix,
    b_matrix,
    dimension_cap,
    sample_counterexample,
    sample_mixture,
    set_dimension_cap,
    signature_from_weights,
    solve_signature_system,
    weights_from_signature,
)

__all__ = [
    "ConcordanceError",
    "amatrix",
    "b_matrix",
    "bound_missing",
    "check_attainable",
    "check_cut_polytope",
    "dimension_cap",
    "elliptical_attainable",
    "elliptical_signature",
    "empirical_signature",
    "enumerate_vertices",
    "sample_counterexample",
    "sample_mixture",
    "set_dimension_cap",
    "signature_from_weights",
    "skeletal_solve",
    "solve_signature_system",
    "t_limit_weights",
    "validate_mixture",
    "weights_from_signature",
]


def _matrix(x):
    return _np.ascontiguousarray(x, dtype=float)


def check_attainable(signature):
    """Feasibility certificate for a partial signature dict, e.g. {"d": 3, "pairs": [...]}."""
    return _json.loads(_core.check_attainable(_json.dumps(signature)))


def bound_missing(signature, targets=None):
    doc = dict(signature)
    if targets is not None:
        doc["targets"] = targets
    return _json.loads(_core.bound_missing(_json.dumps(doc)))


def enumerate_vertices(signature):
    return _json.loads(_core.enumerate_vertices(_json.dumps(signature)))


def empirical_signature(x, ties=False):
    return _json.loads(_core.empirical_signature(_matrix(x), ties))


def elliptical_signature(p, samples=1_000_000, seed=0):
    return _json.loads(_core.elliptical_signature(_matrix(p), samples, seed))


def t_limit_weights(p, mode="analytic", samples=1_000_000, seed=0):
    return _json.loads(_core.t_limit_weights(_matrix(p), mode, samples, seed))


def elliptical_attainable(kendall):
    return _json.loads(_core.elliptical_attainable(_matrix(kendall)))


def check_cut_polytope(kendall):
    return _json.loads(_core.check_cut_polytope(_matrix(kendall)))


def skeletal_solve(d, k):
    return _json.loads(_core.skeletal_solve(d, list(k)))


def validate_mixture(x, level=0.01):
    return _json.loads(_core.validate_mixture(_matrix(x), level))
