"""Backend selection for the trajectory-stepping kernel.

The compiled extension is preferred when importable; the pure-NumPy twin is
the fallback.  `NMR_SQUEEZE_KERNEL` (auto | cython | python) overrides.
"""

import os

from .errors import ConfigError

_BACKENDS = ("auto", "cython", "python")


def get_kernel(name: str | None = None):
    """Return (module, backend_name) for the requested kernel backend."""
    name = name or os.environ.get("NMR_SQUEEZE_KERNEL", "auto")
    if name not in _BACKENDS:
        raise ConfigError(
            f"unknown kernel backend {name!r}; choose from {_BACKENDS}")
    if name in ("auto", "cython"):
        try:
            from . import _kernel
            return _kernel, "cython"
        except ImportError:
            if name == "cython":
                raise ConfigError(
                    "compiled kernel requested but the extension is not built")
    from . import _kernel_py
    return _kernel_py, "python"


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _kernel  # noqa: F401
        out.insert(0, "cython")
    except ImportError:
        pass
    return out
