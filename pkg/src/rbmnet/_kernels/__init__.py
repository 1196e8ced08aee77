"""Hot-kernel selection: compiled extension when available, numpy otherwise.

Set ``RBMNET_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the cross-implementation tests).
"""

import os

if os.environ.get("RBMNET_PURE_PYTHON"):
    from .fallback import IMPL, eg_fit, gibbs_chain
else:
    try:
        from ._core import IMPL, eg_fit, gibbs_chain
    except ImportError:
        from .fallback import IMPL, eg_fit, gibbs_chain

__all__ = ["IMPL", "eg_fit", "gibbs_chain"]
