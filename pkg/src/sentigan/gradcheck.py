"""Finite-difference verification of analytic gradients.

numerical_gradient is the generic central-difference oracle used by the test
suite against every trainable component; finite_difference_check wraps it for
plain dense stacks with a squared loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn

SATURATION_LIMIT = 30.0


def numerical_gradient(f, arrays, h: float = 1e-5):
    """Central-difference gradient of scalar f() w.r.t. each array, in place.

    f must read the current contents of `arrays` each call (they are perturbed
    entry by entry and restored)."""
    grads = []
    for arr in arrays:
        g = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = f()
            flat[i] = orig - h
            down = f()
            flat[i] = orig
            gflat[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max elementwise |a - n| / max(|a|, |n|), treating tiny pairs as exact."""
    a = np.asarray(analytic, dtype=float).ravel()
    n = np.asarray(numeric, dtype=float).ravel()
    denom = np.maximum(np.abs(a), np.abs(n))
    mask = denom > 1e-10
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a - n)[mask] / denom[mask]))


@dataclass
class GradCheckReport:
    tolerance: float
    max_rel_err: float
    per_layer: list = field(default_factory=list)  # (layer idx, rel err)
    saturated_layers: list = field(default_factory=list)
    passed: bool = False


def finite_difference_check(layers, x, target, tolerance: float = 1e-4, h: float = 1e-5):
    """Compare backward() gradients of an MSE loss against central differences.

    Layers whose pre-activations saturate a sigmoid/tanh are flagged in the
    report instead of failing the check."""
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float)

    out, caches = nn.forward(layers, x)
    grad_out = 2.0 * (out - target) / out.size
    analytic, _ = nn.backward(layers, caches, grad_out)

    def loss():
        o, _ = nn.forward(layers, x)
        return float(np.mean((o - target) ** 2))

    report = GradCheckReport(tolerance=tolerance, max_rel_err=0.0)
    for i, layer in enumerate(layers):
        numeric = numerical_gradient(loss, [layer.weights, layer.bias], h=h)
        err = max(
            relative_error(analytic[i][0], numeric[0]),
            relative_error(analytic[i][1], numeric[1]),
        )
        saturated = layer.activation in ("sigmoid", "tanh") and bool(
            np.any(np.abs(caches[i][1]) > SATURATION_LIMIT)
        )
        if saturated:
            report.saturated_layers.append(i)
        report.per_layer.append((i, err))
        if not saturated:
            report.max_rel_err = max(report.max_rel_err, err)
    report.passed = report.max_rel_err < tolerance
    return report
