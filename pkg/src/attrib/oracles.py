"""Combinatorial reference methods: full n!-order enumeration and friends.

These exist to cross-check the fast DP, so they stay deliberately literal:
the Shapley-Shubik oracle walks every one of the n! variable orders and
averages marginal contributions, memoizing the at most 2^n corner values of
the box [r, s].  Orders are represented as tuples listing variables (1-based)
in the sequence they move, e.g. (2, 1) moves variable 2 first.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import AttributionResult, CharacteristicFunction, ValuePair

__all__ = [
    "ORDER_CAP",
    "PermutationWeights",
    "VertexSelector",
    "vertex_value",
    "shapley_shubik_bruteforce",
    "random_order_attribution",
    "value_variant_attribution",
    "hash_order_weights",
    "value_variant_example",
]

ORDER_CAP = 10  # 10! = 3,628,800 orders; enumeration is for verification, not production

_CHUNK = 100_000


def _as_callable(f) -> Callable[[Sequence[float]], float]:
    if callable(f):
        return f
    raise TypeError(f"expected a callable or CharacteristicFunction, got {type(f)!r}")


def _check_cap(n: int):
    if n > ORDER_CAP:
        raise ValueError(f"order enumeration capped at {ORDER_CAP} variables, got {n}")
    if n < 1:
        raise ValueError("need at least one variable")


@dataclass(frozen=True)
class PermutationWeights:
    """Nonnegative weights over variable orders, summing to 1 within 1e-12."""

    weights: dict[tuple[int, ...], float]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("need at least one order")
        n = len(next(iter(self.weights)))
        total = 0.0
        for order, w in self.weights.items():
            if sorted(order) != list(range(1, n + 1)):
                raise ValueError(f"not an order over 1..{n}: {order}")
            if w < 0.0:
                raise ValueError(f"negative weight {w} for order {order}")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, expected 1")

    @property
    def n(self) -> int:
        return len(next(iter(self.weights)))

    @classmethod
    def single(cls, order: Sequence[int]) -> "PermutationWeights":
        return cls({tuple(order): 1.0})

    @classmethod
    def uniform(cls, n: int) -> "PermutationWeights":
        _check_cap(n)
        w = 1.0 / math.factorial(n)
        return cls({p: w for p in itertools.permutations(range(1, n + 1))})


def vertex_value(vp: ValuePair, I: Iterable[int]) -> tuple[float, ...]:
    """Corner of the box [r, s]: s on coordinates in I, r elsewhere."""
    Iset = set(int(i) for i in I)
    for i in Iset:
        if not 1 <= i <= vp.n:
            raise ValueError(f"variable index {i} outside 1..{vp.n}")
    return tuple(vp.s[j] if (j + 1) in Iset else vp.r[j] for j in range(vp.n))


@dataclass(frozen=True)
class VertexSelector:
    """Index subset picking a corner of [r, s] and its opposite corner."""

    I: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "I", frozenset(int(i) for i in self.I))

    def upper(self, vp: ValuePair) -> tuple[float, ...]:
        return vertex_value(vp, self.I)

    def lower(self, vp: ValuePair) -> tuple[float, ...]:
        return vertex_value(vp, set(range(1, vp.n + 1)) - self.I)


def _vertex_table(fn: Callable, vp: ValuePair) -> np.ndarray:
    n = vp.n
    out = np.empty(1 << n, dtype=np.float64)
    for mask in range(1 << n):
        x = [vp.s[j] if (mask >> j) & 1 else vp.r[j] for j in range(n)]
        out[mask] = fn(x)
    return out


def shapley_shubik_bruteforce(f, vp: ValuePair, cap: int = ORDER_CAP) -> AttributionResult:
    """Average marginal contribution over all n! variable orders.

    Evaluates f only on the 2^n box corners (memoized up front), then streams
    the orders in lexicographic chunks; per-variable totals are reduced with
    pairwise summation so the average stays accurate.  Refuses n > cap.
    """
    n = vp.n
    if n > cap:
        raise ValueError(f"order enumeration capped at {cap} variables, got {n}")
    _check_cap(n)
    fn = _as_callable(f)
    vals = _vertex_table(fn, vp)
    z = np.zeros(n, dtype=np.float64)
    perm_iter = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(perm_iter, _CHUNK))
        if not block:
            break
        perms = np.asarray(block, dtype=np.int64)
        masks = np.zeros((len(block), n + 1), dtype=np.int64)
        for k in range(n):
            masks[:, k + 1] = masks[:, k] | np.left_shift(1, perms[:, k])
        diffs = vals[masks[:, 1:]] - vals[masks[:, :-1]]
        for v in range(n):
            z[v] += diffs[perms == v].sum()
    z /= math.factorial(n)
    residual = math.fsum(z) - (vals[-1] - vals[0])
    return AttributionResult("ss-brute", tuple(float(v) for v in z), residual)


def _walk_order(fn: Callable, vp: ValuePair, order: tuple[int, ...], memo: dict, z: list[float], weight: float):
    n = vp.n

    def corner(mask: int) -> float:
        if mask not in memo:
            memo[mask] = fn([vp.s[j] if (mask >> j) & 1 else vp.r[j] for j in range(n)])
        return memo[mask]

    mask = 0
    prev = corner(0)
    for v in order:
        mask |= 1 << (v - 1)
        cur = corner(mask)
        z[v - 1] += weight * (cur - prev)
        prev = cur


def random_order_attribution(f, vp: ValuePair, pw: PermutationWeights) -> AttributionResult:
    """Convex combination of the order walks given by pw; uniform weights recover Shapley-Shubik."""
    n = vp.n
    _check_cap(n)
    if pw.n != n:
        raise ValueError(f"weights are over {pw.n} variables, values have {n}")
    fn = _as_callable(f)
    memo: dict[int, float] = {}
    z = [0.0] * n
    for order, w in sorted(pw.weights.items()):
        if w == 0.0:
            continue
        _walk_order(fn, vp, order, memo, z, w)
    # at least one order has positive weight, so both box corners are memoized
    residual = math.fsum(z) - (memo[(1 << n) - 1] - memo[0])
    return AttributionResult("random-order", tuple(z), residual)


def value_variant_attribution(f, vp: ValuePair, weight_fn: Callable[[ValuePair], PermutationWeights]) -> AttributionResult:
    """Random-order attribution whose weights may depend on the value pair."""
    res = random_order_attribution(f, vp, weight_fn(vp))
    return AttributionResult("value-variant", res.z, res.residual)


def hash_order_weights(vp: ValuePair) -> PermutationWeights:
    """Weights proportional to 1 + H(r, s, order), H a SHA-256 hash mapped into [0, 1).

    The hash is of ``repr((r, s, order))`` so the instance is reproducible
    across runs and platforms while still varying with the value pair.
    """
    n = vp.n
    _check_cap(n)
    raw = {}
    for order in itertools.permutations(range(1, n + 1)):
        digest = hashlib.sha256(repr((vp.r, vp.s, order)).encode()).digest()
        raw[order] = 1.0 + int.from_bytes(digest[:8], "big") / 2.0**64
    total = math.fsum(raw.values())
    weights = {o: w / total for o, w in raw.items()}
    # rounding in the division can leave the sum a few ulps per order off 1;
    # absorb the slack into the largest weight
    heaviest = max(weights, key=weights.get)
    weights[heaviest] += 1.0 - math.fsum(weights.values())
    return PermutationWeights(weights)


def value_variant_example(f, vp: ValuePair) -> AttributionResult:
    """The shipped value-variant instance, using the SHA-256 weight rule."""
    return value_variant_attribution(f, vp, hash_order_weights)
