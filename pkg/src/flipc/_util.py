"""Small shared helpers."""

from __future__ import annotations

import sys

_HEADROOM = 2000


def grow_recursion_limit(depth: int) -> None:
    """Raise the interpreter recursion limit to accommodate ``depth`` frames.

    Deep let-chains and long BDD variable orders need recursion roughly
    proportional to program size.  The limit is only ever raised, never
    lowered.
    """
    needed = depth + _HEADROOM
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)
