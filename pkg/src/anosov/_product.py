"""Renormalized matrix products along words.

Products are kept as ``exp(log_scale) * mat`` with ``mat`` of unit
operator norm, so words of length in the hundreds never overflow.
"""

import numpy as np


def op_norm(m):
    if m.shape[-1] == 2:
        # sigma_1 = (|z + w| + |z - w|) / 2 in the conformal/anticonformal
        # splitting; unlike the trace/determinant formula it does not cancel
        # for nearly conformal matrices
        a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
        return 0.5 * (np.hypot(a + d, b - c) + np.hypot(a - d, b + c))
    return np.linalg.norm(m, ord=2, axis=(-2, -1))


def renormalize(mat, log_scale=0.0):
    """Rescale to unit operator norm, moving the factor into the log scale."""
    n = op_norm(mat)
    if np.ndim(n) == 0:
        if n == 0.0 or not np.isfinite(n):
            raise FloatingPointError("product collapsed to a non-finite or zero matrix")
        return mat / n, log_scale + float(np.log(n))
    if np.any(n == 0.0) or not np.all(np.isfinite(n)):
        raise FloatingPointError("product collapsed to a non-finite or zero matrix")
    return mat / n[:, None, None], log_scale + np.log(n)


def scaled_product(images, word, dim=None):
    """Left-to-right product of ``images[letter]`` over ``word``.

    ``images`` maps signed letters to square matrices.
    """
    if dim is None:
        dim = next(iter(images.values())).shape[0]
    mat = np.eye(dim)
    log_scale = 0.0
    for x in word:
        mat, log_scale = renormalize(mat @ images[x], log_scale)
    return mat, log_scale


def scaled_power(mat, log_scale, n):
    """(mat * e^log_scale)^n by repeated squaring, renormalizing each step."""
    dim = mat.shape[0]
    res, res_log = np.eye(dim), 0.0
    base, base_log = mat, log_scale
    while n > 0:
        if n & 1:
            res, res_log = renormalize(res @ base, res_log + base_log)
        n >>= 1
        if n:
            base, base_log = renormalize(base @ base, 2.0 * base_log)
    return res, res_log
