"""Backend selection for the hot per-replication kernel.

Imports the compiled extension when available, otherwise falls back to the
pure-numpy reference.  Set ``EWAGG_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _ref

if os.environ.get("EWAGG_PURE_PYTHON"):
    _impl = _ref
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = _ref

diag_family_pass = _impl.diag_family_pass
reference_pass = _ref.diag_family_pass


def backend_name() -> str:
    return _impl.BACKEND
