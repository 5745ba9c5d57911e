"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; otherwise
the pure-numpy fallback is used.  Set ``TOKENVOTE_BACKEND=numpy`` (or
``cython``) to force a backend, e.g. for the benchmark comparing both.
"""

import os

from . import _backend_numpy

_requested = os.environ.get("TOKENVOTE_BACKEND", "").strip().lower()

impl = None
if _requested in ("", "cython"):
    try:
        from . import _speedups as impl
    except ImportError:
        impl = None
        if _requested == "cython":
            raise
if impl is None:
    impl = _backend_numpy

BACKEND = impl.BACKEND

MEAN = impl.MEAN
QUADRATIC = impl.QUADRATIC
NORMALIZED_MEDIAN = impl.NORMALIZED_MEDIAN
QUORUM_MEDIAN = impl.QUORUM_MEDIAN
CAPPED_MEDIAN = impl.CAPPED_MEDIAN
MIDPOINT = impl.MIDPOINT
INDEPENDENT_MARKETS = impl.INDEPENDENT_MARKETS
MAJORITARIAN = impl.MAJORITARIAN
PHANTOM_TOL = impl.PHANTOM_TOL
PHANTOM_MAX_ITER = impl.PHANTOM_MAX_ITER

column_medians = impl.column_medians
pairwise_l1_rowsums = impl.pairwise_l1_rowsums
midpoint_index = impl.midpoint_index
phantom_solve = impl.phantom_solve
rule_shares = impl.rule_shares
replace_row_scan = impl.replace_row_scan
move_mass_scan = impl.move_mass_scan
delete_row_scan = impl.delete_row_scan
