"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``DGSWITCH_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("DGSWITCH_BACKEND", "").lower() == "python":
        return _pykernels, "python"
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels, "python"
    return _ckernels, "compiled"


_impl, BACKEND = _load()

eval_agents = _impl.eval_agents
eval_jobs = _impl.eval_jobs
check_conflicts = _impl.check_conflicts
hungarian_max = _impl.hungarian_max
auction_rounds = _impl.auction_rounds


def backends() -> dict[str, ModuleType]:
    """All importable backends, keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["compiled"] = _ckernels
    return out
