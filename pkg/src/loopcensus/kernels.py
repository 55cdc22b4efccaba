"""Selection between the compiled and pure-Python enumeration kernels.

The compiled extension is optional; everything works without it, only
slower.  Both kernels follow the same floating-point evaluation order, so
switching backends does not change any output.
"""

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None


def compiled_available():
    return _compiled is not None


def get_kernel(name=None):
    """Resolve a kernel choice to (name, run_census callable).

    None or "auto" picks the compiled kernel when present.
    """
    if name in (None, "auto"):
        if _compiled is not None:
            return "compiled", _compiled.run_census
        return "python", _kernel_py.run_census
    if name == "python":
        return "python", _kernel_py.run_census
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel requested but not built")
        return "compiled", _compiled.run_census
    raise ValueError(f"unknown kernel {name!r} (use 'auto', 'compiled', 'python')")


def active_kernel_name():
    return "compiled" if _compiled is not None else "python"
