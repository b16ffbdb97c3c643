"""Simulation kernels: compiled extension if built, numpy fallback otherwise."""

from . import layout, pyref

try:
    from . import _simcore
    HAVE_COMPILED = True
except ImportError:  # extension not built; the fallback is fully equivalent
    _simcore = None
    HAVE_COMPILED = False


def get_backend(name: str = "auto"):
    """Return (backend_module, backend_name) for 'auto'|'compiled'|'python'."""
    if name == "auto":
        return (_simcore, "compiled") if HAVE_COMPILED else (pyref, "python")
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel requested but the extension is not built")
        return _simcore, "compiled"
    if name == "python":
        return pyref, "python"
    raise ValueError(f"unknown backend {name!r}; expected auto|compiled|python")
