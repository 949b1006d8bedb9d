"""Hot-kernel backend selection.

The compiled extension is preferred when present; the NumPy fallback is
always available.  Set ``PHOTONMESH_BACKEND=pure`` (or ``compiled``) to force
a choice; forcing ``compiled`` raises if the extension is missing.
"""

from __future__ import annotations

import os

from . import pure


def _select():
    choice = os.environ.get("PHOTONMESH_BACKEND", "auto").lower()
    if choice == "pure":
        return pure
    try:
        from . import _core  # type: ignore[attr-defined]

        return _core
    except ImportError:
        if choice == "compiled":
            raise ImportError(
                "PHOTONMESH_BACKEND=compiled but the extension is not built"
            )
        return pure


_backend = _select()

BACKEND = _backend.BACKEND
apply_events = _backend.apply_events
left_rotate = _backend.left_rotate
right_rotate_dagger = _backend.right_rotate_dagger
mc_defect_counts = _backend.mc_defect_counts


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ('pure', 'compiled' or None=active)."""
    if name is None:
        return _backend
    if name == "pure":
        return pure
    if name == "compiled":
        from . import _core  # type: ignore[attr-defined]

        return _core
    raise ValueError(f"unknown backend {name!r}")
