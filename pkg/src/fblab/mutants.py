"""Deliberate faults used to check that the verify suite has teeth.

Each entry is a context manager that patches one behaviour for the duration
of a ``with`` block.
"""

from __future__ import annotations

from contextlib import contextmanager
from unittest import mock

from . import _search, homfn, phmaps


@contextmanager
def sup_as_inf():
    """Sup nodes evaluate the pointwise minimum."""
    with mock.patch.object(homfn.Sup, "eval_batch", homfn.Inf.eval_batch):
        yield


@contextmanager
def drop_rescaling():
    """Witness tuples are no longer divided by their weak p-norm."""
    with mock.patch.object(_search, "_tighten", lambda T, w: T):
        yield


@contextmanager
def transposed_adjoint():
    """Adjoint maps multiply by the transpose of their matrix."""
    with mock.patch.object(phmaps.Adjoint, "apply_batch", lambda self, Y: Y @ self.matrix):
        yield


MUTATIONS = {
    "sup_as_inf": sup_as_inf,
    "drop_rescaling": drop_rescaling,
    "transposed_adjoint": transposed_adjoint,
}
