"""Compiled-kernel selection.

The extension module accelerates the low-k ascent loop on wireless
utilities.  When it is missing (no compiler at install time), the solver
transparently uses its pure-Python loop, which produces identical traces.
"""

try:
    from welfareopt._kernels._fastloop import run_lowk_box as compiled_run
except ImportError:  # pragma: no cover - depends on the build environment
    compiled_run = None

HAVE_COMPILED = compiled_run is not None
