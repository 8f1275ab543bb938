"""Backend switch for the compiled kernels.

Set ``PHASEBENCH_NUMBA=0`` before import to run every kernel through its
pure-numpy twin.
"""
import os

_FLAG = os.environ.get("PHASEBENCH_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _FLAG not in ("0", "false", "no", "off")

if NUMBA_ENABLED:
    try:
        import numba  # noqa: F401
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
