import hypothesis
import pytest
from hypothesis import strategies as st

from attrib import CharacteristicFunction, MultilinearPoly, SeparableTerm, ValuePair, product_function

hypothesis.settings.register_profile("suite", max_examples=60, deadline=None)
hypothesis.settings.load_profile("suite")

coeffs = st.floats(min_value=-10, max_value=10, allow_nan=False)
values = st.floats(min_value=-3, max_value=3, allow_nan=False)


@st.composite
def multilinear_terms(draw, n, max_terms=6, allow_constant=True):
    count = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(count):
        size = draw(st.integers(0 if allow_constant else 1, n))
        subset = tuple(sorted(draw(st.sets(st.integers(1, n), min_size=size, max_size=size))))
        terms[subset] = draw(coeffs)
    return terms


@st.composite
def separable_terms(draw, n):
    out = []
    for i in range(1, n + 1):
        kind = draw(st.sampled_from(["none", "none", "poly", "exp"]))
        if kind == "poly":
            deg = draw(st.integers(1, 3))
            out.append(SeparableTerm(i, "poly", tuple(draw(st.floats(-2, 2)) for _ in range(deg + 1))))
        elif kind == "exp":
            out.append(SeparableTerm(i, "exp", (draw(st.floats(-0.5, 0.5)), draw(st.floats(-1, 1)), draw(st.floats(-2, 2)))))
    return tuple(out)


@st.composite
def charfns(draw, max_n=5, with_separable=True):
    n = draw(st.integers(1, max_n))
    terms = draw(multilinear_terms(n))
    sep = draw(separable_terms(n)) if with_separable else ()
    return CharacteristicFunction(MultilinearPoly(n, terms), sep)


@st.composite
def charfn_pairs(draw, max_n=5, with_separable=True):
    f = draw(charfns(max_n, with_separable))
    r = tuple(draw(values) for _ in range(f.n))
    s = tuple(draw(values) for _ in range(f.n))
    return f, ValuePair(r, s)


@pytest.fixture
def procurement():
    """Expenditure model a*p*c with the quarter-over-quarter values."""
    return product_function(3), ValuePair((4.0, 1.0, 1.0), (5.0, 12.0, 1.5))
