"""Select the coordinate-descent backend at import time.

The compiled extension is used when importable; set ``PEER_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _cd_py

BACKEND = "python"
cd_path = _cd_py.cd_path

if os.environ.get("PEER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _cd
    except ImportError:
        pass
    else:
        cd_path = _cd.cd_path
        BACKEND = "cython"
