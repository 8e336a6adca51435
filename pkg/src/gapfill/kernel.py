"""Backend selection for the gap-posterior sweep.

Prefers the compiled Cython kernel; falls back to the NumPy implementation
when the extension was not built.  ``BACKEND`` records which one is live so
benchmarks and tests can report it.
"""

from . import _kernel_py

try:
    from . import _ckernel as _impl
except ImportError:  # extension not built
    _impl = _kernel_py

BACKEND: str = _impl.BACKEND

gap_scores = _impl.gap_scores

# the scalar/vector query helpers are not hot; always the NumPy versions
logp_vec = _kernel_py.logp_vec
logp2_vec = _kernel_py.logp2_vec
