from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from supertwist.graded import FunctionSymbol, SuperAlgebra
from supertwist.parser import load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

EVEN = ("x", "y", "z")
ODD = ("xi1", "xi2", "xi3", "xi4")
ALG = SuperAlgebra(EVEN, ODD, [FunctionSymbol("h", ("x", "y"), invertible=True)], jet_order=3)


def scenario(name: str):
    return load_scenario(SCENARIOS / f"{name}.scn")


@pytest.fixture(scope="session")
def alg():
    return ALG


def build(terms, parity=None):
    """Sum of c * h^k * x^a y^b z^c * xi_S over ``terms``; optionally keep one parity."""
    out = ALG.zero()
    for coeff, k, exps, odd in terms:
        if parity is not None and len(odd) % 2 != parity:
            continue
        t = ALG.const(coeff) * ALG.func("h") ** k
        for name, e in zip(EVEN, exps):
            t = t * ALG.coord(name) ** e
        for name in odd:
            t = t * ALG.coord(name)
        out = out + t
    return out


@st.composite
def terms(draw, max_terms=4):
    n = draw(st.integers(1, max_terms))
    out = []
    for _ in range(n):
        coeff = draw(st.fractions(min_value=-5, max_value=5, max_denominator=4))
        k = draw(st.integers(0, 1))
        exps = draw(st.lists(st.integers(0, 2), min_size=3, max_size=3))
        if k + sum(exps) > 4:
            exps = [min(e, 1) for e in exps]
        odd = draw(st.lists(st.sampled_from(ODD), max_size=3, unique=True))
        out.append((coeff, k, tuple(exps), tuple(draw(st.permutations(odd)))))
    return out


def superscalars(parity=None):
    return terms().map(lambda t: build(t, parity))


coords = st.sampled_from(EVEN + ODD)
odd_coords = st.sampled_from(ODD)
even_coords = st.sampled_from(EVEN)
