"""Central finite-difference validation of every analytic gradient.

Relative error uses max(|analytic| + |numeric|, 0.01) in the denominator:
the numeric estimate carries ~1e-7 absolute noise at eps=1e-5 in double
precision, so near-zero gradients are judged on an absolute scale while a
genuine defect on any meaningfully sized gradient still scores far above
the 1e-4 threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DEFAULT_EPS = 1e-5
DEFAULT_TOLERANCE = 1e-4
DENOM_FLOOR = 1e-2


@dataclass
class GradCheckReport:
    max_rel_err: float
    tolerance: float
    block_errors: dict[str, float] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        status = "OK" if self.ok else f"FAIL ({', '.join(self.failures)})"
        return f"gradient check: max rel err {self.max_rel_err:.3e} [{status}]"


def gradient_check(loss_fn: Callable[[], float],
                   params: dict[str, np.ndarray],
                   analytic: dict[str, np.ndarray],
                   eps: float = DEFAULT_EPS,
                   tolerance: float = DEFAULT_TOLERANCE) -> GradCheckReport:
    """Perturb every entry of every parameter block and compare.

    loss_fn re-evaluates the loss with the (mutated) params; params must be
    float64 for the stated tolerance to be meaningful.
    """
    report = GradCheckReport(max_rel_err=0.0, tolerance=tolerance)
    for name, p in params.items():
        g = analytic[name]
        flat = p.reshape(-1)
        gflat = np.asarray(g, dtype=np.float64).reshape(-1)
        block_err = 0.0
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            up = loss_fn()
            flat[j] = orig - eps
            down = loss_fn()
            flat[j] = orig
            numeric = (up - down) / (2.0 * eps)
            err = abs(gflat[j] - numeric) / max(abs(gflat[j]) + abs(numeric), DENOM_FLOOR)
            if err > block_err:
                block_err = err
        report.block_errors[name] = block_err
        if block_err > report.max_rel_err:
            report.max_rel_err = block_err
        if block_err > tolerance:
            report.failures.append(name)
    return report
