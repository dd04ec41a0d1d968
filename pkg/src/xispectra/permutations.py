"""Permutations, rankings, and the forest criterion for joint independence.

A permutation sigma of {1..n} is stored through its image tuple, with 1-based
semantics: ``image[k-1] = sigma(k)``.  Rankings of data columns, relative
ranks ``R_j o R_i^{-1}``, uniform sampling, and exhaustive enumeration all
return :class:`Permutation` values.

The dependence structure of a family of relative ranks drawn from
independent uniform rankings is decided by :func:`is_independent_family`:
the family is mutually independent exactly when the underlying undirected
multigraph of the requested pairs is a forest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationTooLarge, InvalidSample, SizeMismatch, TiesPresent

ENUMERATION_LIMIT = 8


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..n} held as its image tuple.

    >>> s = Permutation((2, 3, 1))
    >>> s(1), s(3)
    (2, 1)
    """

    image: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(int(v) for v in self.image))
        if sorted(self.image) != list(range(1, len(self.image) + 1)):
            raise ValueError(f"not a bijection of 1..{len(self.image)}: {self.image}")

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, k: int) -> int:
        if not 1 <= k <= self.n:
            raise IndexError(f"argument {k} outside 1..{self.n}")
        return self.image[k - 1]

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(1, n + 1)))


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """Composition sigma o tau, i.e. k -> sigma(tau(k)).

    >>> compose(Permutation((2, 3, 1)), Permutation((3, 2, 1))).image
    (1, 3, 2)
    """
    if sigma.n != tau.n:
        raise SizeMismatch(f"cannot compose permutations of sizes {sigma.n} and {tau.n}")
    return Permutation(tuple(sigma.image[t - 1] for t in tau.image))


def inverse(sigma: Permutation) -> Permutation:
    """The inverse permutation: inverse(sigma)(v) = k iff sigma(k) = v."""
    img = [0] * sigma.n
    for k, v in enumerate(sigma.image, start=1):
        img[v - 1] = k
    return Permutation(tuple(img))


def relative_rank(ri: Permutation, rj: Permutation) -> Permutation:
    """The relative rank R_j o R_i^{-1} of ranking ``rj`` against ``ri``.

    >>> relative_rank(Permutation((2, 3, 1)), Permutation((3, 1, 2))).image
    (2, 3, 1)
    """
    return compose(rj, inverse(ri))


def ranks_of(sample, tie_policy: str = "error", rng=None) -> Permutation:
    """Rank vector of a real sample: R(k) = #{i : sample[i] <= sample[k]}.

    With ``tie_policy="error"`` (default) tied values raise
    :class:`TiesPresent`; with ``tie_policy="random"`` the order of tied
    values is broken uniformly at random using ``rng`` (anything accepted by
    ``numpy.random.default_rng``), so the continuous-margin theory applies
    to the resulting ranks.
    """
    values = np.asarray(sample, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise InvalidSample(f"expected a nonempty 1-d sample, got shape {values.shape}")
    if not np.isfinite(values).all():
        raise InvalidSample("sample contains non-finite values")
    n = values.size
    if tie_policy == "error":
        order = np.argsort(values, kind="stable")
        if np.any(np.diff(values[order]) == 0):
            raise TiesPresent("tied values present; use tie_policy='random' to break them")
    elif tie_policy == "random":
        jitter = np.random.default_rng(rng).random(n)
        order = np.lexsort((jitter, values))
    else:
        raise ValueError(f"unknown tie_policy {tie_policy!r}")
    img = np.empty(n, dtype=int)
    img[order] = np.arange(1, n + 1)
    return Permutation(tuple(img))


def sample_uniform(n: int, rng) -> Permutation:
    """A uniform random permutation via the Fisher-Yates shuffle of identity."""
    if n < 1:
        raise ValueError("n must be positive")
    img = list(range(1, n + 1))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        img[i], img[j] = img[j], img[i]
    return Permutation(tuple(img))


def enumerate_all(n: int):
    """Yield all n! permutations in lexicographic order of image.

    Guarded at n <= 8 against factorial blow-up.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"n={n} exceeds enumeration limit {ENUMERATION_LIMIT}")
    for img in itertools.permutations(range(1, n + 1)):
        yield Permutation(img)


@dataclass(frozen=True)
class DependenceGraph:
    """Directed multigraph on vertices {1..vertex_count}; self-loops forbidden.

    Edge (u, v) stands for the relative rank R_v o R_u^{-1} of the pair of
    columns (u, v); duplicate edges are permitted and meaningful.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")
        object.__setattr__(
            self, "edges", tuple((int(u), int(v)) for u, v in self.edges)
        )
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop ({u},{v}) not allowed")
            if not (1 <= u <= self.vertex_count and 1 <= v <= self.vertex_count):
                raise ValueError(f"edge ({u},{v}) outside 1..{self.vertex_count}")


def is_independent_family(graph: DependenceGraph) -> bool:
    """Whether the relative ranks along ``graph.edges`` are mutually independent.

    True iff the underlying undirected multigraph is a forest, with edge
    multiplicities kept: (u,v) and (v,u) count as parallel edges, and any
    parallel pair already closes a cycle.  Decided by union-find: an edge
    joining two vertices in the same component completes a cycle.
    """
    parent = list(range(graph.vertex_count + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in graph.edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True
