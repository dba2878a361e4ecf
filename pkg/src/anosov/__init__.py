"""Singular value diagnostics for matrix representations of free and surface groups."""

from . import boundary, convex, diagnostics, floyd, kernels, linalg, words, zoo
from .boundary import holder_exponent_eigen, holder_exponent_singular, limit_point, transversality
from .convex import ConvexDomain, hilbert_displacement, hilbert_distance
from .diagnostics import Report
from .evaluate import evaluate_ball
from .floyd import FloydFunction, floyd_distance
from .linalg import LinearFunctional, Representation, cartan, cartan_word, lyapunov, lyapunov_word, rep_apply
from .words import BoundaryRay, FreeGroup, SurfaceGroup, ball, parse_word, format_word, reduce, word_length

__version__ = "0.1.0"
