"""MWPM extraction by weight perturbation and Tutte-matrix determinants.

Given a path graph with integer base weights w, a perturbation W in
[1, W_max] (or [0, W_max] for the derandomized family) defines modified
weights

    w~(e) = c~ * w(e) + W(e),      c~ = (|V|/2) * (W_max - 1) + 1,

which preserve the set of minimum-base-weight perfect matchings.  The
antisymmetric matrix B with entries +-2^{w~} then reveals an isolated (i.e.
unique) minimum-modified-weight matching: w* is half the number of trailing
zero bits of det(B), and edge {i,j} belongs to the matching iff
2^{w~({i,j})} * det(B_sub^{(i,j)}) / 2^{2 w*} is an odd integer, where
B_sub^{(i,j)} drops row i and column j.  The candidate is accepted only if
it is a perfect matching whose modified weight equals w*, which directly
certifies MWPM-ness; anything else is reported as NotIsolated and another
perturbation is tried.

Perturbation schemes: fresh uniform draws (randomized), the derandomized
composition family built from w_k(e_j) = (4|V|^2+1)^j mod k, and the
seeded-PRNG schedule that starts at W_max = 2, tries W_max seed sequences
per level, and escalates W_max by 1 on total failure.  Trials carry a
deterministic global index; the first success by that index wins regardless
of how trials are scheduled.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from ._rng import GENERATOR_NAME, mix64
from .bigdet import BigMatrix, det_berkowitz, minor, v2, _int
from .tables import PathGraph


class NotIsolated:
    """Sentinel result: this perturbation did not certify an MWPM."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotIsolated"


NOT_ISOLATED = NotIsolated()


class DecodeFailure(RuntimeError):
    """A decode attempt budget was exhausted."""


@dataclass(frozen=True)
class Matching:
    """A perfect matching as unordered vertex-index pairs."""

    pairs: tuple[tuple[int, int], ...]
    total_base_weight: int


@dataclass(frozen=True)
class PerturbedWeights:
    """Base + perturbation + modified weights along the canonical edge order."""

    base: tuple[int, ...]
    perturbation: tuple[int, ...]
    w_max: int
    scale: int
    modified: tuple[int, ...]

    @classmethod
    def apply(
        cls, pg: PathGraph, perturbation: Sequence[int], w_max: int
    ) -> "PerturbedWeights":
        base = pg.base_weights()
        if len(perturbation) != len(base):
            raise ValueError("perturbation length does not match edge count")
        scale = (pg.n_vertices // 2) * (w_max - 1) + 1
        modified = tuple(
            scale * b + w for b, w in zip(base, perturbation)
        )
        return cls(base, tuple(perturbation), w_max, scale, modified)


# -- perturbation schemes ----------------------------------------------------


@dataclass(frozen=True)
class RandomizedScheme:
    """Fresh uniform W in [1, w_max]^E per attempt, up to a finite budget."""

    w_max: int
    attempts: int
    seed: int


@dataclass(frozen=True)
class DerandomizedFamilyScheme:
    """Walk the composition family W_t^s (t >= 7); W_max = (|V| t)^s."""

    s: int
    t: int


@dataclass(frozen=True)
class SeededPrngScheme:
    """Escalating W_max starting at 2; w_max seed sequences per level."""

    seed: int
    initial_w_max: int = 2
    max_w_max: int | None = None


PerturbationScheme = RandomizedScheme | DerandomizedFamilyScheme | SeededPrngScheme


def scheme_descriptor(scheme: PerturbationScheme) -> dict:
    if isinstance(scheme, RandomizedScheme):
        return {
            "kind": "randomized",
            "w_max": scheme.w_max,
            "attempts": scheme.attempts,
            "seed": scheme.seed,
            "generator": GENERATOR_NAME,
        }
    if isinstance(scheme, DerandomizedFamilyScheme):
        return {"kind": "derandomized_family", "s": scheme.s, "t": scheme.t}
    if isinstance(scheme, SeededPrngScheme):
        return {
            "kind": "seeded_prng",
            "seed": scheme.seed,
            "initial_w_max": scheme.initial_w_max,
            "max_w_max": scheme.max_w_max,
            "generator": GENERATOR_NAME,
        }
    raise TypeError(f"unknown scheme: {scheme!r}")


def randomized_perturbation(
    n_edges: int, w_max: int, seed: int, attempt: int
) -> tuple[int, ...]:
    return tuple(
        1 + mix64(seed, 0xA11, attempt, j) % w_max
        for j in range(1, n_edges + 1)
    )


def perturbation_seed_table(
    n_vertices: int, n_edges: int, k: int, master_seed: int
) -> tuple[int, ...]:
    """Seeds s_{|V|, e_j, k}, fixed in advance by hashing."""
    return tuple(
        mix64(master_seed, 0x5EED, n_vertices, j, k)
        for j in range(1, n_edges + 1)
    )


def seeded_perturbation(
    n_vertices: int, n_edges: int, w_max: int, seed: int, k: int
) -> tuple[int, ...]:
    """W(e_j) = f(j, s_{|V|, e_j, k}) mapped into [1, w_max]."""
    seeds = perturbation_seed_table(n_vertices, n_edges, k, seed)
    return tuple(
        1 + mix64(s, j) % w_max for j, s in enumerate(seeds, start=1)
    )


def generate_derandomized_family(
    pg: PathGraph, s: int, t: int
) -> Iterator[tuple[int, ...]]:
    """All (t-1)^s members of the composition family, lexicographic in
    (k_1..k_s); each member satisfies 0 <= W(e_j) <= (|V| t)^s."""
    if t < 7:
        raise ValueError(f"family parameter t must be >= 7 (got {t})")
    if s < 1:
        raise ValueError(f"family parameter s must be >= 1 (got {s})")
    nv = pg.n_vertices
    m = pg.n_edges
    base = 4 * nv * nv + 1
    radix = nv * t
    for ks in itertools.product(range(2, t + 1), repeat=s):
        yield tuple(
            sum(
                radix ** (s - 1 - i) * pow(base, j, k)
                for i, k in enumerate(ks)
            )
            for j in range(1, m + 1)
        )


def derandomized_w_max(pg: PathGraph, s: int, t: int) -> int:
    return (pg.n_vertices * t) ** s


# -- extraction --------------------------------------------------------------


def build_b_matrix(pg: PathGraph, pw: PerturbedWeights) -> BigMatrix:
    """Antisymmetric Tutte matrix with x_{i,j} = 2^{w~({i,j})}."""
    nv = pg.n_vertices
    if nv % 2:
        raise ValueError("path graph must have an even number of vertices")
    rows = [[_int(0)] * nv for _ in range(nv)]
    for (u, v, _), wmod in zip(pg.edges, pw.modified):
        x = _int(1) << wmod
        rows[u][v] = x
        rows[v][u] = -x
    return BigMatrix(rows)


def try_extract_mwpm(pg: PathGraph, pw: PerturbedWeights):
    """One extraction attempt: a verified Matching, or NOT_ISOLATED."""
    nv = pg.n_vertices
    if nv == 0:
        return Matching((), 0)
    b = build_b_matrix(pg, pw)
    det = det_berkowitz(b)
    if det == 0:
        return NOT_ISOLATED
    w_star = v2(det) // 2
    candidate = []
    for eidx, (u, v, _) in enumerate(pg.edges):
        dm = det_berkowitz(minor(b, u, v))
        if dm == 0:
            continue
        if v2(dm) + pw.modified[eidx] == 2 * w_star:
            candidate.append((u, v, eidx))
    seen = [False] * nv
    for u, v, _ in candidate:
        if seen[u] or seen[v]:
            return NOT_ISOLATED
        seen[u] = seen[v] = True
    if not all(seen):
        return NOT_ISOLATED
    if sum(pw.modified[e] for _, _, e in candidate) != w_star:
        return NOT_ISOLATED
    return Matching(
        tuple((u, v) for u, v, _ in candidate),
        sum(pw.base[e] for _, _, e in candidate),
    )


@dataclass(frozen=True)
class DecodeResult:
    matching: Matching
    attempts_used: int
    w_max_used: int
    scheme: dict

    def to_record(self) -> dict:
        return {
            "matching": [list(p) for p in self.matching.pairs],
            "total_base_weight": int(self.matching.total_base_weight),
            "attempts_used": self.attempts_used,
            "w_max_used": self.w_max_used,
            "scheme": self.scheme,
        }


def with_seed(scheme: PerturbationScheme, seed: int) -> PerturbationScheme:
    """Rebind the scheme's seed (derandomized schemes are seedless)."""
    if isinstance(scheme, DerandomizedFamilyScheme):
        return scheme
    return replace(scheme, seed=seed)


def decode(pg: PathGraph, scheme: PerturbationScheme) -> DecodeResult:
    """Iterate perturbations per scheme; return the first verified MWPM.

    Trials are indexed deterministically; success means the lowest-index
    verified extraction, independent of how trials would be scheduled across
    workers.  An empty path graph decodes to the empty matching.
    """
    descriptor = scheme_descriptor(scheme)
    if pg.n_active == 0:
        return DecodeResult(Matching((), 0), 0, 0, descriptor)
    m = pg.n_edges
    if isinstance(scheme, RandomizedScheme):
        for attempt in range(1, scheme.attempts + 1):
            pert = randomized_perturbation(m, scheme.w_max, scheme.seed, attempt)
            got = try_extract_mwpm(
                pg, PerturbedWeights.apply(pg, pert, scheme.w_max)
            )
            if isinstance(got, Matching):
                return DecodeResult(got, attempt, scheme.w_max, descriptor)
        raise DecodeFailure(
            f"randomized decode exhausted {scheme.attempts} attempts on "
            f"instance |V|={pg.n_vertices}, actives={pg.actives}"
        )
    if isinstance(scheme, DerandomizedFamilyScheme):
        w_max = derandomized_w_max(pg, scheme.s, scheme.t)
        for attempt, pert in enumerate(
            generate_derandomized_family(pg, scheme.s, scheme.t), start=1
        ):
            got = try_extract_mwpm(pg, PerturbedWeights.apply(pg, pert, w_max))
            if isinstance(got, Matching):
                return DecodeResult(got, attempt, w_max, descriptor)
        raise DecodeFailure(
            f"derandomized family (s={scheme.s}, t={scheme.t}) exhausted on "
            f"instance |V|={pg.n_vertices}, actives={pg.actives}"
        )
    if isinstance(scheme, SeededPrngScheme):
        attempts = 0
        w_max = scheme.initial_w_max
        while scheme.max_w_max is None or w_max <= scheme.max_w_max:
            for k in range(1, w_max + 1):
                attempts += 1
                pert = seeded_perturbation(
                    pg.n_vertices, m, w_max, scheme.seed, k
                )
                got = try_extract_mwpm(
                    pg, PerturbedWeights.apply(pg, pert, w_max)
                )
                if isinstance(got, Matching):
                    return DecodeResult(got, attempts, w_max, descriptor)
            w_max += 1
        raise DecodeFailure(
            f"seeded decode reached max_w_max={scheme.max_w_max} on "
            f"instance |V|={pg.n_vertices}, actives={pg.actives}"
        )
    raise TypeError(f"unknown scheme: {scheme!r}")
