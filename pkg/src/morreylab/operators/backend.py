"""Select the pair-lattice backend at import time.

The compiled extension is used when it imports; setting
``MORREYLAB_BACKEND=python`` forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _lattice_py

BACKEND = "python"
lattice_sum = _lattice_py.lattice_sum

if os.environ.get("MORREYLAB_BACKEND", "").lower() != "python":
    try:
        from ._lattice import lattice_sum  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        pass


def get_backend(name: str | None = None):
    """Return (name, lattice_sum) for ``name`` in {None, 'compiled', 'python'}."""
    if name is None:
        return BACKEND, lattice_sum
    if name == "python":
        return "python", _lattice_py.lattice_sum
    if name == "compiled":
        from ._lattice import lattice_sum as compiled

        return "compiled", compiled
    raise ValueError(f"unknown backend {name!r}")
