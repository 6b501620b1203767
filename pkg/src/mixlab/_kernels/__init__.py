"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python
reference is the fallback. Both expose the same functions and produce
bit-identical trajectories from the same draw arrays. Set
``MIXLAB_BACKEND=python`` or ``MIXLAB_BACKEND=compiled`` to force a choice
(forcing ``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

_forced = os.environ.get("MIXLAB_BACKEND", "").strip().lower()

if _forced not in ("", "python", "compiled"):
    raise ImportError(
        f"MIXLAB_BACKEND must be 'python' or 'compiled', not {_forced!r}"
    )

if _forced == "python":
    from . import _ref as _impl
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise
        from . import _ref as _impl
        BACKEND = "python"

run_glauber = _impl.run_glauber
run_glauber_coupled = _impl.run_glauber_coupled
run_block_marginal = _impl.run_block_marginal
run_block_marginal_coupled = _impl.run_block_marginal_coupled
run_block_full = _impl.run_block_full

__all__ = [
    "BACKEND",
    "run_glauber",
    "run_glauber_coupled",
    "run_block_marginal",
    "run_block_marginal_coupled",
    "run_block_full",
]
