"""Sampling and search problems and the reductions between them."""

from .oracles import (HOST_PLUGINS, ExactSampler, FixedSampler, HostSearcher, MachineSearcher,
                      OracleFailure, Sampler, Searcher, constant_sampler, parse_searcher,
                      uniform_index, uniform_searcher)
from .problem import (DEFAULT_EXPONENT, ExclusionReport, InapplicableError, Membership,
                      ReductionParams, decide, derive_params, dyadic_k, k_for_accuracy,
                      membership, params_for_accuracy, short_program_exclusion, split_tuple,
                      tuple_arity, tuple_prob, z_decode, z_encoding)
from .reductions import sample_to_search, search_to_sample
from .verify import (FAIL, EndToEndReport, OtherDirReport, RtosChainReport, SeedHistogram,
                     StorReport, build_otherdir, machine_output_distribution,
                     search_to_sample_distribution, verify_end_to_end, verify_otherdir,
                     verify_rtos_chain, verify_stor, wilson_interval)

__all__ = [name for name in dir() if not name.startswith("_")]
