"""Finite probability distributions and Markov kernels.

A kernel from a space X (size m) to a space Y (size k) is stored as a dense
k x m column-stochastic matrix: column j is the distribution of the output
given input x_j.  Composition is matrix multiplication, parallel combination
is the Kronecker product, and the adjoint (transpose) pulls functions on Y
back to functions on X.

All values are immutable after construction and every operation is a pure
function, so they are safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidParameter,
    LengthMismatch,
    NegativeWeight,
    NotNormalized,
    ParseError,
    SizeGuardExceeded,
    SpaceMismatch,
)

#: Absolute tolerance on "sums to one" checks at construction time.
STOCHASTIC_ATOL = 1e-9

#: Maximum number of matrix entries a materialized product kernel may have.
PRODUCT_ENTRY_GUARD = 10**6

#: Separator used to build product-space outcome names, e.g. "a⊗b".
PRODUCT_SEP = "⊗"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Space:
    """An ordered finite set of distinct outcome names."""

    labels: tuple[str, ...]

    def __init__(self, labels: Iterable[str]):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise LengthMismatch("a space needs at least one outcome")
        if len(set(labels)) != len(labels):
            raise InvalidParameter(f"duplicate outcome names in {labels!r}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, name: str) -> int:
        try:
            return self.labels.index(name)
        except ValueError:
            raise SpaceMismatch(f"{name!r} is not an outcome of {self.labels!r}") from None

    def __iter__(self):
        return iter(self.labels)


@dataclass(frozen=True, eq=False)
class Dist:
    """A probability vector over a named finite space."""

    space: Space
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.space),):
            raise LengthMismatch(f"{w.shape} weights for {len(self.space)} outcomes")
        if np.any(w < 0):
            raise NegativeWeight("distribution weights must be non-negative")
        if not abs(float(w.sum()) - 1.0) <= STOCHASTIC_ATOL:
            raise NotNormalized(f"weights sum to {float(w.sum())!r}, not 1")
        object.__setattr__(self, "weights", _freeze(w))

    def __getitem__(self, name: str) -> float:
        return float(self.weights[self.space.index(name)])


@dataclass(frozen=True, eq=False)
class Kernel:
    """A Markov kernel domain ⇝ codomain as a column-stochastic matrix.

    ``matrix[i, j]`` is the probability of codomain outcome i given domain
    outcome j; every column sums to 1.
    """

    domain: Space
    codomain: Space
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (len(self.codomain), len(self.domain)):
            raise LengthMismatch(
                f"kernel matrix has shape {m.shape}, expected "
                f"({len(self.codomain)}, {len(self.domain)})"
            )
        if np.any(m < 0):
            raise NegativeWeight("kernel entries must be non-negative")
        sums = m.sum(axis=0)
        bad = np.abs(sums - 1.0) > STOCHASTIC_ATOL
        if np.any(bad):
            j = int(np.argmax(bad))
            raise NotNormalized(f"column {j} sums to {sums[j]!r}, not 1")
        object.__setattr__(self, "matrix", _freeze(m))

    def column(self, j: int) -> Dist:
        """The output distribution for the j-th domain outcome."""
        return Dist(self.codomain, self.matrix[:, j])


def make_dist(space: Space, weights: Sequence[float]) -> Dist:
    """Validate weights into a :class:`Dist`.  Never normalizes silently."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != len(space):
        raise LengthMismatch(f"{w.shape[0] if w.ndim == 1 else w.shape} weights for {len(space)} outcomes")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight in {w.tolist()}")
    total = float(w.sum())
    if not abs(total - 1.0) <= STOCHASTIC_ATOL:
        raise NotNormalized(f"weights sum to {total!r}, not 1")
    return Dist(space, w)


def normalized(weights: Sequence[float]) -> np.ndarray:
    """Explicitly rescale non-negative weights to sum to 1."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise NegativeWeight("cannot normalize negative weights")
    total = float(w.sum())
    if total <= 0:
        raise NotNormalized("cannot normalize an all-zero weight vector")
    return w / total


def point_mass(space: Space, name: str) -> Dist:
    w = np.zeros(len(space))
    w[space.index(name)] = 1.0
    return Dist(space, w)


def uniform(space: Space) -> Dist:
    return Dist(space, np.full(len(space), 1.0 / len(space)))


def identity(space: Space) -> Kernel:
    return Kernel(space, space, np.eye(len(space)))


def compose(t2: Kernel, t1: Kernel) -> Kernel:
    """The kernel ``t2 ∘ t1`` (first t1, then t2) via matrix product."""
    if t1.codomain != t2.domain:
        raise SpaceMismatch(
            f"cannot compose: inner codomain {t1.codomain.labels!r} != "
            f"outer domain {t2.domain.labels!r}"
        )
    return Kernel(t1.domain, t2.codomain, t2.matrix @ t1.matrix)


def pushforward(t: Kernel, p: Dist) -> Dist:
    """The image distribution T(P)."""
    if p.space != t.domain:
        raise SpaceMismatch("distribution is not on the kernel's domain")
    return Dist(t.codomain, t.matrix @ p.weights)


def pullback(t: Kernel, f: Sequence[float]) -> np.ndarray:
    """The adjoint action on functions: (T* f)(x) = E_{y~T(x)} f(y).

    Satisfies <T(P), f> == <P, pullback(T, f)> for every P.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (len(t.codomain),):
        raise LengthMismatch(f"function has {f.shape[0]} values for {len(t.codomain)} outcomes")
    return t.matrix.T @ f


def product_space(spaces: Sequence[Space]) -> Space:
    """Cartesian product with deterministic names ``a⊗b⊗...``."""
    combos = itertools.product(*(s.labels for s in spaces))
    return Space(PRODUCT_SEP.join(c) for c in combos)


def parallel_product(ts: Sequence[Kernel]) -> Kernel:
    """Run kernels in parallel on the product of their domains.

    The matrix is the Kronecker product of the factors, taken in order, so
    the first factor varies slowest in the product-space outcome order.
    """
    ts = list(ts)
    if not ts:
        raise InvalidParameter("parallel_product of no kernels")
    rows = cols = 1
    for t in ts:
        rows *= len(t.codomain)
        cols *= len(t.domain)
    if rows * cols > PRODUCT_ENTRY_GUARD:
        raise SizeGuardExceeded(
            f"product kernel would have {rows}x{cols} entries "
            f"(guard: {PRODUCT_ENTRY_GUARD})"
        )
    if len(ts) == 1:
        return ts[0]
    matrix = reduce(np.kron, (t.matrix for t in ts))
    return Kernel(
        product_space([t.domain for t in ts]),
        product_space([t.codomain for t in ts]),
        matrix,
    )


def replicate(t: Kernel, n: int) -> Kernel:
    """The n-fold parallel product of a kernel with itself."""
    if n < 1:
        raise InvalidParameter(f"replication count must be >= 1, got {n}")
    return parallel_product([t] * n)


# -- JSON wire formats ---------------------------------------------------------
# Kernel: {"from": [names...], "to": [names...], "matrix": [[row...], ...]}
# Dist:   {"space": [names...], "weights": [...]}

def kernel_to_json(t: Kernel) -> dict:
    return {
        "from": list(t.domain.labels),
        "to": list(t.codomain.labels),
        "matrix": [[float(x) for x in row] for row in t.matrix],
    }


def kernel_from_json(obj: dict) -> Kernel:
    if not isinstance(obj, dict) or not {"from", "to", "matrix"} <= set(obj):
        raise ParseError('kernel JSON needs keys "from", "to", "matrix"')
    try:
        matrix = np.asarray(obj["matrix"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"kernel matrix is not numeric: {exc}") from exc
    if matrix.ndim != 2:
        raise ParseError("kernel matrix must be a list of equal-length rows")
    return Kernel(Space(obj["from"]), Space(obj["to"]), matrix)


def dist_to_json(p: Dist) -> dict:
    return {"space": list(p.space.labels), "weights": [float(x) for x in p.weights]}


def dist_from_json(obj: dict) -> Dist:
    if not isinstance(obj, dict) or not {"space", "weights"} <= set(obj):
        raise ParseError('dist JSON needs keys "space", "weights"')
    try:
        weights = [float(x) for x in obj["weights"]]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"dist weights are not numeric: {exc}") from exc
    return make_dist(Space(obj["space"]), weights)
