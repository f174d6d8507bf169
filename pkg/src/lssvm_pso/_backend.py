"""Pick the compiled core when available, else the numpy fallback.

Set ``LSSVM_PSO_BACKEND=python`` to force the fallback even when the
extension is importable.
"""
import logging
import os

from . import _fallback

logger = logging.getLogger(__name__)

BACKENDS = {"python": _fallback}

try:
    from . import _core
except ImportError:  # extension not built
    _core = None
else:
    BACKENDS["compiled"] = _core

if os.environ.get("LSSVM_PSO_BACKEND", "").lower() == "python" or _core is None:
    NAME = "python"
else:
    NAME = "compiled"

impl = BACKENDS[NAME]
logger.debug("using %s backend", NAME)
