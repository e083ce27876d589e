"""Hot-loop kernels with a compiled fast path.

The Cython extension is picked up when it was built; otherwise the
pure-Python twins take over. Set ICHFORGE_PURE=1 to force the fallback
(used by the kernel benchmark and the twin-agreement tests).
"""

from __future__ import annotations

import os

from ichforge._kernels import pure

if os.environ.get("ICHFORGE_PURE"):
    _impl = pure
else:
    try:
        from ichforge._kernels import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = pure

lcs_length = _impl.lcs_length
count_tokens = _impl.count_tokens
IMPLEMENTATION: str = _impl.IMPLEMENTATION

__all__ = ["lcs_length", "count_tokens", "IMPLEMENTATION", "pure"]
