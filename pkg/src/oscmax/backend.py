"""Backend selection for the numerical core.

Two interchangeable implementations of the hot kernel routines exist: a
compiled extension (``oscmax._core``, built from Cython sources when a C
compiler is available) and a pure-numpy fallback (``oscmax._core_py``).
The compiled one is picked automatically when importable.

Set ``OSCMAX_BACKEND=python`` (or ``compiled``) to force a choice; forcing
``compiled`` raises if the extension is missing instead of silently falling
back.
"""

import os

from . import _core_py

_ENV = "OSCMAX_BACKEND"
_COMPILED_NAMES = ("compiled", "c", "ext")
_PYTHON_NAMES = ("python", "py", "numpy")


def _load_compiled():
    from . import _core  # noqa: PLC0415

    return _core


def get_backend(name):
    """Return the backend module for an explicit name.

    Parameters
    ----------
    name : str
        One of ``compiled``/``c``/``ext`` or ``python``/``py``/``numpy``.
    """
    key = name.strip().lower()
    if key in _COMPILED_NAMES:
        return _load_compiled()
    if key in _PYTHON_NAMES:
        return _core_py
    raise ValueError(f"unknown backend name: {name!r}")


def _select():
    forced = os.environ.get(_ENV, "").strip().lower()
    if forced:
        return get_backend(forced)
    try:
        return _load_compiled()
    except ImportError:
        return _core_py


core = _select()
BACKEND = "compiled" if core.__name__.endswith("._core") else "python"
