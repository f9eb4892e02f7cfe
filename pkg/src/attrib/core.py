"""Characteristic functions: sparse multilinear part plus additively separable terms.

Variables are numbered 1..n.  A multilinear part is stored as a sparse map
from index subsets to coefficients, so ``{(1, 2): 3.0}`` is ``3*x1*x2`` and
``{(): 5.0}`` is the constant 5.  Separable terms are univariate functions of
a single variable drawn from a small closed registry of kinds, each of which
has an exact symbolic derivative and composes cleanly with affine changes of
variable.  All values are immutable after construction and every operation
here is a pure function, so instances can be shared freely across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

Subset = tuple[int, ...]

__all__ = [
    "DomainError",
    "MultilinearPoly",
    "SeparableTerm",
    "CharacteristicFunction",
    "ValuePair",
    "AttributionResult",
    "evaluate",
    "gradient",
    "partial_derivative",
    "combine",
    "permute_variables",
    "affine_reparameterize",
    "permute_vector",
    "monomial",
    "from_terms",
    "product_function",
    "variables_used",
]


class DomainError(ValueError):
    """A separable term was evaluated outside its domain (e.g. log of x <= 0)."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


# ---------------------------------------------------------------------------
# multilinear part


def _canonical_terms(n: int, terms) -> dict[Subset, float]:
    items = terms.items() if isinstance(terms, Mapping) else terms
    acc: dict[Subset, float] = {}
    for key, coeff in items:
        idx = tuple(int(i) for i in key)
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated index in monomial {idx}; degree above 1 per variable is not representable")
        for i in idx:
            if not 1 <= i <= n:
                raise ValueError(f"variable index {i} outside 1..{n}")
        k = tuple(sorted(idx))
        acc[k] = acc.get(k, 0.0) + float(coeff)
    # exact-zero pruning only, so that combine() stays exactly additive
    return {k: c for k, c in sorted(acc.items()) if c != 0.0}


@dataclass
class MultilinearPoly:
    """Sparse multilinear polynomial: sum of coeff * prod_{i in I} x_i.

    Keys are canonical sorted index tuples; zero coefficients are never stored.
    """

    n: int
    terms: dict[Subset, float]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("variable count must be nonnegative")
        self.terms = _canonical_terms(self.n, self.terms)

    @classmethod
    def zero(cls, n: int) -> "MultilinearPoly":
        return cls(n, {})

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, x: Sequence[float]) -> float:
        total = 0.0
        for I, c in self.terms.items():
            p = c
            for j in I:
                p *= x[j - 1]
            total += p
        return total

    def partial(self, i: int) -> "MultilinearPoly":
        if not 1 <= i <= self.n:
            raise ValueError(f"variable index {i} outside 1..{self.n}")
        out = {}
        for I, c in self.terms.items():
            if i in I:
                out[tuple(j for j in I if j != i)] = c
        return MultilinearPoly(self.n, out)

    def scaled(self, a: float) -> "MultilinearPoly":
        return MultilinearPoly(self.n, {k: a * c for k, c in self.terms.items()})


# ---------------------------------------------------------------------------
# separable terms
#
# Registry of univariate kinds, with params:
#   poly    (c0, c1, ...)        c0 + c1*x + c2*x^2 + ...
#   affine  (a, b)               a*x + b
#   log     (a, b, scale)        scale * ln(a*x + b), needs a*x + b > 0
#   exp     (a, b, scale)        scale * exp(a*x + b)
#   powlaw  (a, b, scale, p)     scale * (a*x + b)^p, integer p != 0
#
# powlaw exists so that differentiating log stays inside the registry.  Every
# kind is closed under the inner affine substitution x -> (x - d)/c, which is
# what affine_reparameterize needs.

_PARAM_COUNT = {"affine": 2, "log": 3, "exp": 3, "powlaw": 4}


@dataclass(frozen=True)
class SeparableTerm:
    index: int
    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.index < 1:
            raise ValueError("separable term index must be >= 1")
        if self.kind == "poly":
            if not self.params:
                raise ValueError("poly term needs at least one coefficient")
        elif self.kind in _PARAM_COUNT:
            if len(self.params) != _PARAM_COUNT[self.kind]:
                raise ValueError(f"{self.kind} term takes {_PARAM_COUNT[self.kind]} parameters")
            if self.kind == "powlaw":
                p = self.params[3]
                if p != int(p) or p == 0:
                    raise ValueError("powlaw exponent must be a nonzero integer")
        else:
            raise ValueError(f"unknown separable kind {self.kind!r}")

    def value(self, x: float) -> float:
        k, p = self.kind, self.params
        if k == "poly":
            acc = 0.0
            for c in reversed(p):
                acc = acc * x + c
            return acc
        if k == "affine":
            return p[0] * x + p[1]
        if k == "log":
            arg = p[0] * x + p[1]
            if arg <= 0.0:
                raise DomainError(f"log term on variable {self.index} got nonpositive argument {arg}", self.index)
            return p[2] * math.log(arg)
        if k == "exp":
            return p[2] * math.exp(p[0] * x + p[1])
        arg = p[0] * x + p[1]
        e = int(p[3])
        if arg == 0.0 and e < 0:
            raise DomainError(f"powlaw term on variable {self.index} got zero base with negative exponent", self.index)
        return p[2] * arg ** e

    def derivative(self) -> "SeparableTerm":
        k, p = self.kind, self.params
        if k == "poly":
            d = tuple(j * c for j, c in enumerate(p))[1:]
            return SeparableTerm(self.index, "poly", d or (0.0,))
        if k == "affine":
            return SeparableTerm(self.index, "poly", (p[0],))
        if k == "log":
            return SeparableTerm(self.index, "powlaw", (p[0], p[1], p[2] * p[0], -1.0))
        if k == "exp":
            return SeparableTerm(self.index, "exp", (p[0], p[1], p[2] * p[0]))
        e = int(p[3])
        if e == 1:
            return SeparableTerm(self.index, "poly", (p[2] * p[0],))
        return SeparableTerm(self.index, "powlaw", (p[0], p[1], p[2] * p[0] * e, float(e - 1)))

    def scaled(self, a: float) -> "SeparableTerm":
        k, p = self.kind, self.params
        if k == "poly":
            return SeparableTerm(self.index, "poly", tuple(a * c for c in p))
        if k == "affine":
            return SeparableTerm(self.index, "affine", (a * p[0], a * p[1]))
        return SeparableTerm(self.index, k, p[:2] + (a * p[2],) + p[3:])

    def compose_affine(self, c: float, d: float) -> "SeparableTerm":
        """Substitute x -> (x - d)/c inside this term."""
        k, p = self.kind, self.params
        if k == "poly":
            return SeparableTerm(self.index, "poly", _poly_compose_affine(p, c, d))
        if k == "affine":
            return SeparableTerm(self.index, "affine", (p[0] / c, p[1] - p[0] * d / c))
        return SeparableTerm(self.index, k, (p[0] / c, p[1] - p[0] * d / c) + p[2:])

    def is_zero(self) -> bool:
        if self.kind == "poly":
            return all(c == 0.0 for c in self.params)
        if self.kind == "affine":
            return self.params == (0.0, 0.0)
        return self.params[2] == 0.0

    def reindexed(self, new_index: int) -> "SeparableTerm":
        return SeparableTerm(new_index, self.kind, self.params)


def _poly_compose_affine(coeffs: tuple[float, ...], c: float, d: float) -> tuple[float, ...]:
    # expand sum_j coeffs[j] * ((x - d)/c)^j in powers of x
    out = [0.0]
    power = [1.0]
    b0, a0 = -d / c, 1.0 / c
    for cj in coeffs:
        while len(out) < len(power):
            out.append(0.0)
        for t, v in enumerate(power):
            out[t] += cj * v
        nxt = [0.0] * (len(power) + 1)
        for t, v in enumerate(power):
            nxt[t] += b0 * v
            nxt[t + 1] += a0 * v
        power = nxt
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return tuple(out)


def _merge_separable(n: int, terms: Iterable[SeparableTerm]) -> tuple[SeparableTerm, ...]:
    poly_acc: dict[int, list[float]] = {}
    scale_acc: dict[tuple, float] = {}
    for t in terms:
        if t.index > n:
            raise ValueError(f"separable term index {t.index} exceeds variable count {n}")
        if t.kind in ("poly", "affine"):
            coeffs = t.params if t.kind == "poly" else (t.params[1], t.params[0])
            acc = poly_acc.setdefault(t.index, [])
            while len(acc) < len(coeffs):
                acc.append(0.0)
            for j, c in enumerate(coeffs):
                acc[j] += c
        else:
            key = (t.index, t.kind) + t.params[:2] + t.params[3:]
            scale_acc[key] = scale_acc.get(key, 0.0) + t.params[2]
    out: list[SeparableTerm] = []
    for idx in sorted(poly_acc):
        coeffs = poly_acc[idx]
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        if any(c != 0.0 for c in coeffs):
            out.append(SeparableTerm(idx, "poly", tuple(coeffs)))
    for key in sorted(scale_acc):
        scale = scale_acc[key]
        if scale == 0.0:
            continue
        idx, kind = key[0], key[1]
        params = key[2:4] + (scale,) + key[4:]
        out.append(SeparableTerm(idx, kind, params))
    out.sort(key=lambda t: (t.index, t.kind, t.params))
    return tuple(out)


# ---------------------------------------------------------------------------
# the characteristic function and attribution value types


@dataclass
class CharacteristicFunction:
    """f(x) = multilinear part + sum of separable terms."""

    multilinear: MultilinearPoly
    separable: tuple[SeparableTerm, ...] = ()

    def __post_init__(self):
        self.separable = _merge_separable(self.multilinear.n, self.separable)

    @property
    def n(self) -> int:
        return self.multilinear.n

    def __call__(self, x: Sequence[float]) -> float:
        return evaluate(self, x)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [[list(I), c] for I, c in self.multilinear.terms.items()],
            "separable": [[t.index, t.kind, list(t.params)] for t in self.separable],
        }


@dataclass(frozen=True)
class ValuePair:
    """Initial vector r and final vector s of equal length with finite entries."""

    r: tuple[float, ...]
    s: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(v) for v in self.r))
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        if len(self.r) != len(self.s):
            raise ValueError(f"initial and final vectors differ in length: {len(self.r)} vs {len(self.s)}")
        for v in self.r + self.s:
            if not math.isfinite(v):
                raise ValueError("value vectors must be finite")

    @property
    def n(self) -> int:
        return len(self.r)

    def delta(self, i: int) -> float:
        return self.s[i - 1] - self.r[i - 1]


@dataclass(frozen=True)
class AttributionResult:
    """Per-variable attributions plus the completeness residual sum(z) - (f(s) - f(r))."""

    method: str
    z: tuple[float, ...]
    residual: float
    converged: bool = True

    def total(self) -> float:
        return math.fsum(self.z)


# ---------------------------------------------------------------------------
# operations


def _check_dims(f: CharacteristicFunction, x: Sequence[float]):
    if len(x) != f.n:
        raise ValueError(f"dimension mismatch: function has {f.n} variables, vector has {len(x)}")


def evaluate(f: CharacteristicFunction, x: Sequence[float]) -> float:
    """Evaluate f at the point x (length must equal f.n)."""
    _check_dims(f, x)
    total = f.multilinear.evaluate(x)
    for t in f.separable:
        total += t.value(x[t.index - 1])
    return total


def gradient(f: CharacteristicFunction, x: Sequence[float]) -> list[float]:
    """All partial derivatives of f at x, as a list indexed by variable - 1."""
    _check_dims(f, x)
    g = [0.0] * f.n
    for I, c in f.multilinear.terms.items():
        k = len(I)
        if k == 0:
            continue
        vals = [x[j - 1] for j in I]
        prefix = [1.0] * (k + 1)
        for t in range(k):
            prefix[t + 1] = prefix[t] * vals[t]
        suffix = 1.0
        for t in range(k - 1, -1, -1):
            g[I[t] - 1] += c * prefix[t] * suffix
            suffix *= vals[t]
    for t in f.separable:
        g[t.index - 1] += t.derivative().value(x[t.index - 1])
    return g


def partial_derivative(f: CharacteristicFunction, i: int) -> CharacteristicFunction:
    """Return the partial derivative of f with respect to variable i.

    Monomials containing i drop the factor x_i, monomials without i vanish,
    the separable term on i is replaced by its exact derivative, and all other
    separable terms vanish.
    """
    if not 1 <= i <= f.n:
        raise ValueError(f"variable index {i} outside 1..{f.n}")
    sep = tuple(t.derivative() for t in f.separable if t.index == i)
    return CharacteristicFunction(f.multilinear.partial(i), sep)


def combine(f1: CharacteristicFunction, f2: CharacteristicFunction, a: float = 1.0, b: float = 1.0) -> CharacteristicFunction:
    """Return a*f1 + b*f2 with merged sparse terms and zero coefficients pruned."""
    if f1.n != f2.n:
        raise ValueError(f"dimension mismatch: {f1.n} vs {f2.n} variables")
    terms: dict[Subset, float] = dict(f1.multilinear.scaled(a).terms)
    for I, c in f2.multilinear.scaled(b).terms.items():
        terms[I] = terms.get(I, 0.0) + c
    sep = tuple(t.scaled(a) for t in f1.separable) + tuple(t.scaled(b) for t in f2.separable)
    return CharacteristicFunction(MultilinearPoly(f1.n, terms), sep)


def _check_permutation(sigma: Sequence[int], n: int) -> tuple[int, ...]:
    sig = tuple(int(v) for v in sigma)
    if len(sig) != n or sorted(sig) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {sigma}")
    return sig


def permute_variables(f: CharacteristicFunction, sigma: Sequence[int]) -> CharacteristicFunction:
    """Relabel variable i as sigma[i-1] everywhere in f.

    A monomial over the index set I becomes a monomial over sigma(I), so the
    result g satisfies g(y) = f(x) whenever y[sigma(i)-1] = x[i-1].
    """
    sig = _check_permutation(sigma, f.n)
    terms = {tuple(sorted(sig[j - 1] for j in I)): c for I, c in f.multilinear.terms.items()}
    sep = tuple(t.reindexed(sig[t.index - 1]) for t in f.separable)
    return CharacteristicFunction(MultilinearPoly(f.n, terms), sep)


def permute_vector(sigma: Sequence[int], x: Sequence[float]) -> tuple[float, ...]:
    """Move x's entry for variable i into slot sigma[i-1] (companion to permute_variables)."""
    sig = _check_permutation(sigma, len(x))
    out = [0.0] * len(x)
    for i, v in enumerate(x):
        out[sig[i] - 1] = v
    return tuple(out)


def affine_reparameterize(f: CharacteristicFunction, j: int, c: float, d: float) -> CharacteristicFunction:
    """Return g with variable j replaced by (x_j - d)/c, so g(..., c*y + d, ...) = f(..., y, ...).

    Requires c > 0.  The multilinear part stays multilinear because the
    substitution has degree 1; the separable term on j is composed with the
    inner affine map, which every registered kind supports.
    """
    if not 1 <= j <= f.n:
        raise ValueError(f"variable index {j} outside 1..{f.n}")
    if c <= 0:
        raise ValueError(f"scale must be positive, got {c}")
    terms: dict[Subset, float] = {}

    def add(I: Subset, v: float):
        terms[I] = terms.get(I, 0.0) + v

    for I, coeff in f.multilinear.terms.items():
        if j in I:
            add(I, coeff / c)
            add(tuple(i for i in I if i != j), -coeff * d / c)
        else:
            add(I, coeff)
    sep = tuple(t.compose_affine(c, d) if t.index == j else t for t in f.separable)
    return CharacteristicFunction(MultilinearPoly(f.n, terms), sep)


# ---------------------------------------------------------------------------
# small constructors


def monomial(n: int, indices: Iterable[int], coeff: float = 1.0) -> CharacteristicFunction:
    return CharacteristicFunction(MultilinearPoly(n, {tuple(indices): coeff}))


def from_terms(n: int, terms, separable: Iterable[SeparableTerm] = ()) -> CharacteristicFunction:
    return CharacteristicFunction(MultilinearPoly(n, terms), tuple(separable))


def product_function(n: int) -> CharacteristicFunction:
    """x_1 * x_2 * ... * x_n."""
    return monomial(n, range(1, n + 1))


def variables_used(f: CharacteristicFunction) -> set[int]:
    used = {i for I in f.multilinear.terms for i in I}
    used.update(t.index for t in f.separable if not t.is_zero())
    return used
