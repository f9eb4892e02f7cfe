"""Exact Aumann-Shapley-Shubik attribution via a per-monomial dynamic program.

For the monomial c * prod_{i in I} x_i the attribution to variable i is

    c * (s_i - r_i) * sum_k w_k(|I|) * X_k

where w_k(n) = k! (n-1-k)! / n! and X_k sums, over the k-subsets K of the
remaining variables, the mixed endpoint products prod_K s * prod_rest r.  The
X row is built by a two-buffer recursion in O(m^2) time and O(m) memory; the
full function is handled monomial by monomial plus the endpoint rule
f_i(s_i) - f_i(r_i) for separable terms.

Everything runs in plain double precision.  For large variable counts the DP
row spans a huge dynamic range: with hundreds of variables of typical size
above (or below) 1, intermediate cells can overflow (or underflow) doubles
even though the final attribution is benign.  Keep per-variable magnitudes
near 1 when attributing monomials with thousands of variables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .core import AttributionResult, CharacteristicFunction, ValuePair, evaluate, gradient

__all__ = [
    "shapley_weight",
    "shapley_weights",
    "ShapleyWeightTable",
    "DpState",
    "dp_subset_sums",
    "attribute_monomial",
    "attribute_ass",
    "attribute_naive",
]

RowHook = Callable[[list, list], None]


@lru_cache(maxsize=None)
def shapley_weights(n: int) -> tuple[float, ...]:
    """All order weights w_k(n) = k! (n-1-k)! / n! for k = 0..n-1.

    Computed by the multiplicative recurrence w_{k+1} = w_k (k+1)/(n-1-k)
    from w_0 = 1/n; raw factorials would overflow doubles near n = 171 while
    the weights themselves stay representable far beyond that.
    """
    if n < 1:
        raise ValueError("need at least one variable")
    w = [0.0] * n
    w[0] = 1.0 / n
    for k in range(n - 1):
        w[k + 1] = w[k] * (k + 1) / (n - 1 - k)
    return tuple(w)


def shapley_weight(k: int, n: int) -> float:
    """w_k(n) = k! (n-1-k)! / n!, the weight of a k-subset of predecessors."""
    if not 0 <= k <= n - 1:
        raise ValueError(f"subset size {k} outside 0..{n - 1}")
    return shapley_weights(n)[k]


@dataclass(frozen=True)
class ShapleyWeightTable:
    n: int
    w: tuple[float, ...]

    @classmethod
    def for_n(cls, n: int) -> "ShapleyWeightTable":
        return cls(n, shapley_weights(n))


def dp_subset_sums(r_vals: Sequence[float], s_vals: Sequence[float], row_hook: RowHook | None = None) -> list[float]:
    """Row X_k = sum over k-subsets K of prod_K s * prod_complement r.

    Two reusable buffers of length m+1 are the only auxiliary storage; if
    row_hook is given it is called once per absorbed variable with both live
    buffers, which lets callers audit that bound.
    """
    m = len(r_vals)
    curr = [0.0] * (m + 1)
    prev = [0.0] * (m + 1)
    curr[0] = 1.0
    size = 1
    for j in range(m):
        prev, curr = curr, prev
        rj = r_vals[j]
        sj = s_vals[j]
        curr[0] = rj * prev[0]
        for k in range(1, size):
            curr[k] = sj * prev[k - 1] + rj * prev[k]
        curr[size] = sj * prev[size - 1]
        size += 1
        if row_hook is not None:
            row_hook(prev, curr)
    return curr[:size]


@dataclass
class DpState:
    """Final row of mixed endpoint subset sums for a list of variables."""

    row: list[float]

    @classmethod
    def from_values(cls, r_vals: Sequence[float], s_vals: Sequence[float]) -> "DpState":
        return cls(dp_subset_sums(r_vals, s_vals))


def attribute_monomial(
    coeff: float,
    indices: Iterable[int],
    vp: ValuePair,
    i: int,
    row_hook: RowHook | None = None,
    kahan: bool = False,
) -> float:
    """Attribution to variable i of the single monomial coeff * prod_I x.

    O(m^2) time and O(m) memory for m = |I|.  The remaining variables are
    absorbed in ascending index order; the recursion is commutative so the
    order only fixes reproducibility.
    """
    I = tuple(sorted(set(indices)))
    if i not in I:
        raise ValueError(f"variable {i} is not in the monomial {I}")
    others = [j for j in I if j != i]
    r_vals = [vp.r[j - 1] for j in others]
    s_vals = [vp.s[j - 1] for j in others]
    row = dp_subset_sums(r_vals, s_vals, row_hook)
    w = shapley_weights(len(I))
    if kahan:
        acc = comp = 0.0
        for k in range(len(I)):
            y = w[k] * row[k] - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
    else:
        acc = 0.0
        for k in range(len(I)):
            acc += w[k] * row[k]
    return coeff * (vp.s[i - 1] - vp.r[i - 1]) * acc


def _accumulate(z: list[float], comp: list[float], slot: int, value: float, kahan: bool):
    if kahan:
        y = value - comp[slot]
        t = z[slot] + y
        comp[slot] = (t - z[slot]) - y
        z[slot] = t
    else:
        z[slot] += value


def attribute_ass(f: CharacteristicFunction, vp: ValuePair, kahan: bool = False) -> AttributionResult:
    """Exact attribution of f(s) - f(r): DP per monomial plus endpoint rule per separable term.

    Cost is O(m^2) per (monomial, member variable) pair.  Monomials are
    folded in ascending key order so results are bit-stable across runs.
    """
    if vp.n != f.n:
        raise ValueError(f"dimension mismatch: function has {f.n} variables, values have {vp.n}")
    n = f.n
    z = [0.0] * n
    comp = [0.0] * n
    for I, c in f.multilinear.terms.items():
        for i in I:
            _accumulate(z, comp, i - 1, attribute_monomial(c, I, vp, i, kahan=kahan), kahan)
    for t in f.separable:
        change = t.value(vp.s[t.index - 1]) - t.value(vp.r[t.index - 1])
        _accumulate(z, comp, t.index - 1, change, kahan)
    residual = math.fsum(z) - (evaluate(f, vp.s) - evaluate(f, vp.r))
    return AttributionResult("ass", tuple(z), residual)


def attribute_naive(f: CharacteristicFunction, vp: ValuePair) -> AttributionResult:
    """Endpoint-gradient baseline z_i = d_i f(s) * (s_i - r_i).

    Complete only for functions linear in each changing variable; the
    generally nonzero residual is the point of keeping it around.
    """
    if vp.n != f.n:
        raise ValueError(f"dimension mismatch: function has {f.n} variables, values have {vp.n}")
    g = gradient(f, vp.s)
    z = tuple(g[k] * (vp.s[k] - vp.r[k]) for k in range(f.n))
    residual = math.fsum(z) - (evaluate(f, vp.s) - evaluate(f, vp.r))
    return AttributionResult("naive", z, residual)
