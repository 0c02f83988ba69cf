"""Training hot loops with two interchangeable backends.

The compiled Cython extension (`_ckernels`) is preferred; the numpy
implementation (`_pykernels`) is the fallback when the extension is not
built. Selection happens once at import time and can be forced with
WEBTRIAGE_KERNELS=c|python. `benchmarks/bench_kernels.py` compares the two.

All three entry points operate on CSR-format batches:

  predict_probs(indptr, indices, data, theta) -> probs
  accumulate_gradient(indptr, indices, data, y, sample_weight, probs, out_grad)
  adam_update(theta, m, v, grad, t, lr, beta1, beta2, eps)

`theta`, `grad`, `m`, `v` have length n_features+1 with the bias slot last;
indptr/indices are int64, floats are float64. adam_update and
accumulate_gradient work in place. `indptr` may be a slice of a larger
batch's row pointers: its values are absolute offsets into indices/data,
which lets the training loop pass zero-copy batch views.
"""

from __future__ import annotations

import os

_forced = os.environ.get("WEBTRIAGE_KERNELS", "").strip().lower()

if _forced in ("", "c"):
    try:
        from . import _ckernels as _impl
        BACKEND = "c"
    except ImportError:
        if _forced == "c":
            raise
        from . import _pykernels as _impl
        BACKEND = "python"
elif _forced in ("py", "python"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    raise ImportError(f"WEBTRIAGE_KERNELS must be 'c' or 'python', got {_forced!r}")

predict_probs = _impl.predict_probs
accumulate_gradient = _impl.accumulate_gradient
adam_update = _impl.adam_update


def available_backends() -> dict[str, object]:
    """Importable backend modules by name (for tests and benchmarks)."""
    from . import _pykernels
    backends: dict[str, object] = {"python": _pykernels}
    try:
        from . import _ckernels
        backends["c"] = _ckernels
    except ImportError:
        pass
    return backends
