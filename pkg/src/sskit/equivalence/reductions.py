"""The two reductions between sampling and search."""

from __future__ import annotations

from collections.abc import Iterator

from ..bits import BitString
from ..dist import FiniteDistribution
from .oracles import OracleFailure, Sampler, Searcher, uniform_index
from .problem import ReductionParams, Tuple


def sample_to_search(sampler: Sampler, D: FiniteDistribution, params: ReductionParams,
                     bits: Iterator[int]) -> Tuple:
    """Solve the search problem with N independent sampler calls at accuracy eps = delta/2N."""
    Y = tuple(sampler.sample(D, params.eps, bits) for _ in range(params.N))
    if any(len(y) != params.m for y in Y):
        raise OracleFailure("sampler returned a string of the wrong width")
    return Y


def search_to_sample(searcher: Searcher, D: FiniteDistribution, params: ReductionParams,
                     bits: Iterator[int]) -> BitString:
    """One searcher call at failure target delta, then a uniformly chosen coordinate.

    For a target accuracy eps build ``params`` with ``params_for_accuracy``,
    which sets ``delta <= eps/2``.
    """
    Y = searcher.search(D, params, bits)
    if len(Y) != params.N:
        raise OracleFailure(f"searcher returned {len(Y)} entries, expected {params.N}")
    return Y[uniform_index(params.N, bits)]
