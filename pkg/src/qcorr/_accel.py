"""JIT switch for the numeric kernels.

Kernels are compiled with numba when it is importable and ``QCORR_DISABLE_JIT``
is unset (or ``0``). Otherwise the pure-numpy implementations in
:mod:`qcorr.kernels` are used. ``QCORR_THREADS`` caps numba's thread pool.
"""
import os

_truthy = {"1", "true", "yes", "on"}

JIT_DISABLED = os.environ.get("QCORR_DISABLE_JIT", "0").strip().lower() in _truthy

try:
    if JIT_DISABLED:
        raise ImportError
    import numba

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB may be too old; workqueue is always available
        numba.config.THREADING_LAYER = "workqueue"
    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


if HAS_NUMBA:
    prange = numba.prange
else:
    prange = range


def set_threads(n=None):
    """Apply ``n`` (or ``QCORR_THREADS``) as the numba thread cap."""
    if n is None:
        env = os.environ.get("QCORR_THREADS")
        if not env:
            return
        n = int(env)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if HAS_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
