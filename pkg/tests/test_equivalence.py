import itertools
from fractions import Fraction
from functools import lru_cache

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from sskit.bits import SeededBits, all_strings
from sskit.dist import ConditioningError, DimensionError, FiniteDistribution
from sskit.equivalence import (ExactSampler, FixedSampler, HostSearcher, InapplicableError,
                               MachineSearcher, OracleFailure, build_otherdir, constant_sampler,
                               decide, derive_params, k_for_accuracy, membership,
                               params_for_accuracy, parse_searcher, sample_to_search,
                               search_to_sample, search_to_sample_distribution,
                               short_program_exclusion, tuple_arity, uniform_index,
                               uniform_searcher, verify_otherdir, verify_rtos_chain, verify_stor,
                               wilson_interval, z_decode, z_encoding)
from sskit.equivalence.problem import dyadic_k
from sskit.equivalence.verify import FAIL
from sskit.kolmo import KBudget, k_upper_literal, universal_prior
from sskit.machine import Program, programs, run

import oracles

F = Fraction
U1 = FiniteDistribution.uniform(1)
U2 = FiniteDistribution.uniform(2)
# nearly deterministic bit: short programs print improbable tuples
SKEW = FiniteDistribution(1, {"0": F(1, 1024), "1": F(1023, 1024)})


def asm(text: str, times: int = 1) -> Program:
    return Program.from_asm(" ".join([text] * times))


# ---- parameters


@pytest.mark.parametrize("m, k, N, beta, eps", [
    (8, 1, 35, 2, F(1, 140)),
    (8, 0, 8, 1, F(1, 16)),
    (2, 1, 9, 2, F(1, 36)),
])
def test_derive_params_examples(m, k, N, beta, eps):
    p = derive_params(m, k)
    assert (p.N, p.beta, p.eps, p.delta) == (N, beta, eps, F(1, 2**k))


@given(st.integers(1, 64), st.integers(0, 8))
def test_tuple_arity_matches_integer_oracle(m, k):
    # n >= m * 2^(21k/10)  <=>  n^10 >= m^10 * 2^(21k)
    target = m**10 * 2 ** (21 * k)
    n = tuple_arity(m, k)
    assert n**10 >= target > (n - 1) ** 10


def test_tuple_arity_integer_exponent():
    assert tuple_arity(3, 2, 2) == 48
    assert derive_params(1, 3, "1.5").N == 23


def test_derive_params_errors():
    with pytest.raises(ValueError):
        derive_params(0, 1)
    with pytest.raises(ValueError):
        derive_params(1, -1)


@pytest.mark.parametrize("eps, k", [(2, 0), (1, 1), (F(1, 2), 2), (F(3, 10), 3), (F(1, 36), 7)])
def test_k_for_accuracy(eps, k):
    assert k_for_accuracy(eps) == k
    assert params_for_accuracy(2, eps).delta <= F(eps) / 2


@pytest.mark.parametrize("delta, k", [(1, 0), (F(1, 2), 1), (F(1, 3), 2), (F(3, 4), 1)])
def test_dyadic_rounding(delta, k):
    assert dyadic_k(delta) == k
    with pytest.raises(ValueError):
        dyadic_k(0)


# ---- instance encoding


def test_z_encoding_example():
    assert z_encoding(FiniteDistribution.point(""), 0) == "1" + "1" + "010" + "1"


@st.composite
def dists(draw, max_width=3):
    m = draw(st.integers(0, max_width))
    ys = list(all_strings(m))
    w = draw(st.lists(st.integers(0, 12), min_size=len(ys), max_size=len(ys)))
    if not sum(w):
        w[0] = 1
    return FiniteDistribution.from_weights(m, dict(zip(ys, w)))


@given(dists(), st.integers(0, 10))
def test_z_round_trip(D, k):
    assert z_decode(z_encoding(D, k)) == (D, k)


@given(dists(), dists(), st.integers(0, 3), st.integers(0, 3))
def test_z_injective(D, E, k, j):
    if (D, k) != (E, j):
        assert z_encoding(D, k) != z_encoding(E, j)


# ---- membership


def test_membership_examples():
    params = derive_params(2, 1)
    point = FiniteDistribution.point("01")
    assert membership(("01",) * 9, point, params)
    half = FiniteDistribution(2, {"00": F(1, 2), "11": F(1, 2)})
    res = decide(("00",) * 8 + ("01",), half, params)
    assert not res.member and res.off_support
    with pytest.raises(DimensionError):
        decide(("0",) * 9, U2, params)
    with pytest.raises(DimensionError):
        decide(("00",) * 8, U2, params)


def test_all_zeros_tuple_admitted_when_no_short_generator_fits():
    # surprisal 18, beta 2: only programs under 16 bits could exclude it
    params = derive_params(2, 1)
    res = decide(("00",) * 9, U2, params)
    assert (res.surprisal_ceil, res.threshold) == (18, 16)
    z = z_encoding(U2, 1)
    longest = max(len(oracles.interpret(ops, z)[1]) for _, ops in oracles.all_valid_programs(15))
    assert longest < 18
    assert res.member


@lru_cache(maxsize=None)
def _outputs(z: str, max_len: int):
    """Shortest program length per output string, by the oracle interpreter."""
    best = {}
    for bits, ops in oracles.all_valid_programs(max_len):
        status, out, *_ = oracles.interpret(ops, z)
        if status == "HALTED":
            best.setdefault(out, len(bits))
    return best


def _member_oracle(Y, D, params, max_len):
    P = F(1)
    for y in Y:
        P *= D.prob(y)
    if not P:
        return False
    K = _outputs(z_encoding(D, params.k), max_len).get("".join(Y), float("inf"))
    return K == float("inf") or P * 2 ** (K + params.beta) >= 1


@pytest.mark.parametrize("D", [U1, SKEW, FiniteDistribution(1, {"0": F(1, 3), "1": F(2, 3)})],
                         ids=["uniform", "skew", "third"])
def test_membership_matches_definition(D):
    params = derive_params(1, 1)
    for Y in itertools.product("01", repeat=params.N):
        assert membership(Y, D, params, KBudget(16)) == _member_oracle(Y, D, params, 16)


def test_membership_shrinks_as_budget_grows():
    params = derive_params(1, 1)
    tuples = list(itertools.product("01", repeat=params.N))
    sets = [{Y for Y in tuples if membership(Y, SKEW, params, KBudget(L))} for L in (8, 16, 24, 27)]
    assert all(big <= small for small, big in zip(sets, sets[1:]))
    assert sets[-1] < sets[0]


# ---- exclusion


def test_exclusion_examples():
    params = derive_params(1, 1)
    rep = short_program_exclusion(asm("OUT", 5), SKEW, params)
    assert rep.applicable and rep.excluded and rep.consistent
    assert rep.surprisal() == 50
    # literal program of the most likely tuple: no claim
    rep = short_program_exclusion(asm("FLIP OUT", 5), SKEW, params)
    assert not rep.applicable and rep.member
    point = FiniteDistribution.point("1")
    rep = short_program_exclusion(asm("OUT", 5), point, params)
    assert rep.off_support and rep.excluded
    with pytest.raises(InapplicableError):
        short_program_exclusion(asm("OUT", 4), SKEW, params)
    with pytest.raises(InapplicableError):
        short_program_exclusion(asm("MOVL"), SKEW, params)


@pytest.mark.parametrize("D", [SKEW, U1], ids=["skew", "uniform"])
def test_exclusion_over_program_corpus(D):
    params = derive_params(1, 1)
    z = z_encoding(D, params.k)
    checked = 0
    for p in programs(24):
        out = run(p, z, "")
        if out.halted and len(out.output) == params.tuple_bits:
            assert short_program_exclusion(p, D, params, z=z).consistent
            checked += 1
    assert checked > 0


# ---- oracles and reductions


@pytest.mark.parametrize("N", range(1, 10))
def test_uniform_index_is_exact(N):
    width = (N - 1).bit_length()
    hits = []
    for v in itertools.product((0, 1), repeat=width):
        try:
            hits.append(uniform_index(N, iter(v)))
        except StopIteration:
            pass
    assert sorted(hits) == list(range(N))


def test_uniform_index_rejects():
    with pytest.raises(ValueError):
        uniform_index(0, iter([]))


def test_sample_to_search_point_mass():
    D = FiniteDistribution.point("10")
    params = derive_params(2, 1)
    Y = sample_to_search(ExactSampler(), D, params, SeededBits(1, 0))
    assert Y == ("10",) * 9 and membership(Y, D, params)


def test_sample_to_search_width_guard():
    with pytest.raises(OracleFailure):
        sample_to_search(FixedSampler(U1, 0), U2, derive_params(2, 0), SeededBits(0, 0))


def test_search_to_sample_point_mass():
    D = FiniteDistribution.point("11")
    params = derive_params(2, 1)
    searcher = HostSearcher("constant", lambda D, params, bits: (D.support[0],) * params.N)
    assert {search_to_sample(searcher, D, params, SeededBits(3, t)) for t in range(20)} == {"11"}


def test_search_to_sample_uniform_machine_is_exact():
    params = derive_params(1, 1)
    C = search_to_sample_distribution(uniform_searcher(params.tuple_bits), U1, params)
    assert C == {"0": F(1, 2), "1": F(1, 2)}


def test_search_to_sample_failure_outcome():
    params = derive_params(1, 1)
    C = search_to_sample_distribution(MachineSearcher(asm("RDR OUT", 4), 4), U1, params)
    assert C == {FAIL: 1}
    with pytest.raises(OracleFailure):
        search_to_sample(MachineSearcher(asm("RDR OUT", 4), 4), U1, params, SeededBits(0, 0))


def test_search_to_sample_accuracy_wiring():
    params = params_for_accuracy(1, 1)
    assert params.k == 1 and params.delta == F(1, 2)


@pytest.mark.parametrize("text", ["host:exact", "host:zeros", "machine:bits:11:0x1d5,rho=0"])
def test_parse_searcher(text):
    s = parse_searcher(text)
    assert s.descriptor() == text
    if text.startswith("machine"):
        assert s.program == Program.from_asm("FLIP OUT") and s.rho == 0


@pytest.mark.parametrize("text", ["host:nope", "machine:bits:11:0x1d5", "quantum:x",
                                  "machine:bits:3:0x0,rho=1"])
def test_parse_searcher_errors(text):
    with pytest.raises(ValueError):
        parse_searcher(text)


def test_host_searcher_shape_guard():
    bad = HostSearcher("short", lambda D, params, bits: ("0",))
    with pytest.raises(OracleFailure):
        bad.search(U1, derive_params(1, 1), SeededBits(0, 0))


# ---- sampling -> search verifier


def test_wilson_interval():
    with mpmath.workprec(128):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0 and 0.05 < hi < 0.07
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_stor_bound_grid(m, k):
    params = derive_params(m, k)
    rep = verify_stor(FiniteDistribution.uniform(m), ExactSampler(), params, 300, seed=7)
    assert rep.bound == F(1, 2**params.beta)
    assert rep.passed


def test_stor_adversarial_near_sampler():
    params = derive_params(1, 1)
    C = FiniteDistribution(1, {"0": F(3, 8), "1": F(5, 8)})
    rep = verify_stor(U1, FixedSampler.against(C, U1), params, 300, seed=3)
    assert rep.declared_accuracy == F(1, 8)
    assert rep.bound == F(5, 8) + F(1, 4)
    assert rep.passed


def test_stor_constant_sampler_control():
    params = derive_params(1, 1)
    rep = verify_stor(SKEW, constant_sampler("0", SKEW), params, 50, seed=1)
    assert rep.failure_rate == 1
    assert rep.bound > 1


def test_stor_parallel_matches_serial():
    params = derive_params(2, 1)
    a = verify_stor(U2, ExactSampler(), params, 64, seed=5)
    b = verify_stor(U2, ExactSampler(), params, 64, seed=5, jobs=2)
    assert a.to_json() == b.to_json()


# ---- search -> sampling chain


def _chain_names(rep):
    return {c.name.split("[")[0] for c in rep.checks}


def test_rtos_chain_honest_small():
    params = derive_params(1, 1)
    rep = verify_rtos_chain(uniform_searcher(params.tuple_bits), U1, params)
    assert rep.passed and rep.success_mass == 1 and rep.measured_tv == 0
    assert _chain_names(rep) >= {f"rtos.{i}" for i in range(1, 9)}


SEARCHERS = {
    # each pair of output bits is one random bit repeated: marginals sit on {00, 11}
    "biased": MachineSearcher(asm("RDR OUT OUT", 9), 9),
    "partially-constant": MachineSearcher(Program.from_asm(" ".join(["RDR OUT"] * 10 + ["OUT"] * 8)), 10),
}


@pytest.mark.parametrize("name", sorted(SEARCHERS))
def test_rtos_chain_corpus(name):
    params = derive_params(2, 1)
    rep = verify_rtos_chain(SEARCHERS[name], U2, params)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    assert rep.measured_tv > 0
    assert rep.max_k >= 1


def test_rtos_chain_partly_aborting():
    # half the seeds run MOVL at the left edge
    params = derive_params(1, 0)
    searcher = MachineSearcher(Program.from_asm("RDR [ MOVL ] RDR OUT"), 2)
    rep = verify_rtos_chain(searcher, U1, params)
    assert rep.success_mass == F(1, 2) and rep.malformed_mass == F(1, 2)
    assert rep.passed and rep.measured_tv == F(1, 2)


def test_rtos_chain_point_mass():
    D = FiniteDistribution.point("01")
    params = derive_params(2, 1)
    rep = verify_rtos_chain(MachineSearcher(asm("OUT FLIP OUT FLIP", 9), 0), D, params)
    assert rep.passed and rep.measured_tv == 0
    assert all(c.lhs == 0 for c in rep.checks if c.name.startswith(("rtos.3", "rtos.4")))


def test_rtos_chain_null_conditioning():
    params = derive_params(1, 1)
    with pytest.raises(ConditioningError):
        verify_rtos_chain(MachineSearcher(asm("OUT", 5), 0), SKEW, params)


def test_rtos_chain_reports_q():
    params = derive_params(1, 1)
    rep = verify_rtos_chain(uniform_searcher(5), U1, params)
    j = rep.to_json()
    assert j["hypothesis_holds"] and "realized_q" in j and "kappa" in j


# ---- converse construction


def odd(y):
    return y.count("1") % 2 == 1


def test_build_otherdir_examples():
    budget = KBudget(30)
    prior = universal_prior(2, budget=budget).distribution()
    assert build_otherdir(lambda y: True, 2, budget=budget) == prior
    Dx = build_otherdir(odd, 2, budget=budget)
    assert set(Dx.support) == {"01", "10"}
    k = universal_prior(2, budget=budget).k_values
    assert Dx.prob("01") / Dx.prob("10") == F(2 ** k["10"], 2 ** k["01"])
    assert build_otherdir(lambda y: y == "11", 2, budget=budget) == FiniteDistribution.point("11")
    with pytest.raises(ConditioningError):
        build_otherdir(lambda y: False, 2, budget=budget)


OTHERDIR_SEARCHERS = {
    "point-10": MachineSearcher(k_upper_literal("10")[1], 0),
    "coin-pair": MachineSearcher(Program.from_asm("RDR OUT FLIP OUT"), 1),
    "half-miss": MachineSearcher(Program.from_asm("RDR OUT RDR OUT"), 2),
}


@pytest.mark.parametrize("name", sorted(OTHERDIR_SEARCHERS))
def test_otherdir_corpus(name):
    budget = KBudget(30)
    Dx = build_otherdir(odd, 2, budget=budget)
    rep = verify_otherdir(odd, Dx, OTHERDIR_SEARCHERS[name], 1, budget=budget)
    assert rep.passed
    assert rep.measured_tv <= rep.tv_bound
    assert rep.c == universal_prior(2, budget=budget).c


def test_otherdir_point_searcher_tv():
    budget = KBudget(30)
    Dx = build_otherdir(odd, 2, budget=budget)
    rep = verify_otherdir(odd, Dx, OTHERDIR_SEARCHERS["point-10"], 1, budget=budget)
    assert rep.measured_tv == 1 - Dx.prob("10")


def test_otherdir_null():
    budget = KBudget(30)
    Dx = build_otherdir(odd, 2, budget=budget)
    with pytest.raises(ConditioningError):
        verify_otherdir(odd, Dx, MachineSearcher(Program.from_asm("OUT OUT"), 0), 1, budget=budget)
