"""Convergence analysis of real and functional continued fractions."""

import json

from ._cfhyp import (  # noqa: F401
    CfhypError,
    certify_functional,
    convergents,
    direct_limit,
    lyapunov,
    svd_pair,
)
from ._cfhyp import analyze_json as _analyze_json


def analyze(spec):
    """Report for a problem spec given as a dict."""
    return json.loads(_analyze_json(json.dumps(spec)))
