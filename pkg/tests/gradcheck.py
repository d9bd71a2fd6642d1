"""Central finite differences, independent of the analytic backward pass."""

import numpy as np


def numeric_gradients(model, loss_fn, eps=1e-4, points=3):
    """Central differences with a 3- or 5-point stencil.  The 5-point form
    tolerates a larger ``eps``, which matters for tensors whose gradient is
    orders of magnitude below the loss (roundoff scales as loss / eps)."""
    grads = {}
    for name, arr in model.params.items():
        num = np.zeros_like(arr)
        flat = arr.reshape(-1)
        out = num.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            def at(delta):
                flat[i] = old + delta
                return loss_fn()

            if points == 5:
                out[i] = (8 * (at(eps) - at(-eps)) - (at(2 * eps) - at(-2 * eps))) / (12 * eps)
            else:
                out[i] = (at(eps) - at(-eps)) / (2 * eps)
            flat[i] = old
        grads[name] = num
    return grads


def relative_errors(analytic, numeric):
    errs = {}
    for name, a in analytic.items():
        n = numeric[name]
        denom = max(np.linalg.norm(a), np.linalg.norm(n))
        errs[name] = 0.0 if denom < 1e-12 else float(np.linalg.norm(a - n) / denom)
    return errs
