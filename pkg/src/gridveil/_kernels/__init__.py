"""Kernel backend selection.

The compiled extension is preferred when present; set ``GRIDVEIL_PURE=1`` to
force the NumPy backend (used by the benchmark and the parity tests).  The
active backend name is exported as ``BACKEND`` and recorded in run manifests.
"""

import os

from . import pure

if os.environ.get("GRIDVEIL_PURE", "") not in ("", "0"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

MASK64 = pure.MASK64
GOLDEN = pure.GOLDEN

raw_words = _impl.raw_words
uniform_block = _impl.uniform_block
normal_block = _impl.normal_block
portable_log = _impl.portable_log
mc_success_count = _impl.mc_success_count
secular_sweep = _impl.secular_sweep
