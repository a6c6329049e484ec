"""Kernel backend selection.

The compiled extension is used when it imports; set ``CQ_PURE_PYTHON=1`` to
force the numpy fallback.  ``BACKEND`` names the active implementation and
``get_backend`` gives explicit access to either one (tests and the benchmark
compare them).
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])


if _ckernels is not None and os.environ.get("CQ_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
    _impl = _ckernels
else:
    BACKEND = "python"
    _impl = _pykernels

chain_distortion = _impl.chain_distortion
pair_table = _impl.pair_table
chain_transition = _impl.chain_transition
