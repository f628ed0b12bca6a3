"""Ground-truth orbit counting over finite quotients.

Irreducible representations of the uniformly potent group attached to a
lattice are counted by enumerating orbits of the (contragredient) adjoint
action on dual vectors mod p^N; an orbit of size p^{2k} contributes one
irreducible of dimension p^k.  Module-dual orbits of the base action give
the coefficients of the relative zeta function (orbit size = constituent
dimension).

Orbits are discovered by breadth-first search from seeds in ascending
encoding order, so the partition and every report derived from it are
deterministic and independent of the worker budget.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BudgetExceeded,
    InvalidParams,
    NonFinalCoefficient,
    NotPotent,
    OddOrbitExponent,
    OracleUnsupported,
)
from .lattice import LatticeSpec, SemidirectSpec, potency_check

DEFAULT_BUDGET = 200_000_000


def default_budget() -> int:
    env = os.environ.get("REPZETA_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _vp(x: int, p: int) -> int:
    if x == 0:
        raise InvalidParams("valuation of zero")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _vp_factorial(k: int, p: int) -> int:
    v, pk = 0, p
    while pk <= k:
        v += k // pk
        pk *= p
    return v


def _ad_matrix(spec: LatticeSpec, i: int) -> list[list[int]]:
    d = spec.dim
    return [[spec.brackets[i][j][k] for j in range(d)] for k in range(d)]


def _mat_mul(A, B, mod=None):
    n = len(A)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for k in range(n):
            a = Ai[k]
            if a:
                Bk = B[k]
                row = out[i]
                for j in range(n):
                    row[j] += a * Bk[j]
        if mod:
            out[i] = [x % mod for x in out[i]]
    return out


def _exp_scaled(B: list[list[int]], p: int, m: int, N: int) -> tuple[tuple[int, ...], ...]:
    """exp(p^m B) mod p^N, exact: terms p^{mk} B^k / k! summed while nonzero.

    Terms with m*k - v_p(k!) >= N vanish; since m*k - k/(p-1) is increasing
    and bounds that valuation from below, truncation is sound.
    """
    n = len(B)
    mod = p**N
    acc = [[(1 if i == j else 0) for j in range(n)] for i in range(n)]
    power = [row[:] for row in acc]  # B^k, exact integers
    fac_unit = 1  # p-free part of k! mod p^N
    k = 0
    while k * (m * (p - 1) - 1) < N * (p - 1):
        k += 1
        power = _mat_mul(power, B)
        x = k
        while x % p == 0:
            x //= p
        fac_unit = (fac_unit * x) % mod
        vfac = _vp_factorial(k, p)
        if m * k - vfac >= N:
            continue
        scale = p ** (m * k - vfac)
        inv_unit = pow(fac_unit, -1, mod)
        for i in range(n):
            row = power[i]
            arow = acc[i]
            for j in range(n):
                arow[j] = (arow[j] + row[j] * scale * inv_unit) % mod
    return tuple(tuple(x % mod for x in row) for row in acc)


@dataclass(frozen=True)
class AdjointGenerators:
    labels: tuple[str, ...]
    matrices: tuple[tuple[tuple[int, ...], ...], ...]  # exp(p^m ad(x_i)) mod p^N
    prime: int
    level: int  # N
    congruence_m: int


def _check_oracle_scope(spec: LatticeSpec, N: int):
    if spec.prime == 2 or spec.residue_degree != 1:
        raise OracleUnsupported("oracle requires odd p and residue degree 1")
    if N < 1:
        raise InvalidParams("level N must be >= 1")


def adjoint_generators(spec: LatticeSpec, N: int) -> AdjointGenerators:
    _check_oracle_scope(spec, N)
    if not potency_check(spec, spec.level_m):
        raise NotPotent(f"{spec.name} is not potent at level m={spec.level_m}")
    mats = tuple(
        _exp_scaled(_ad_matrix(spec, i), spec.prime, spec.level_m, N)
        for i in range(spec.dim)
    )
    return AdjointGenerators(spec.basis, mats, spec.prime, N, spec.level_m)


def _contragredients(spec_dim: int, ads: list[list[list[int]]], p: int, m: int, N: int):
    """exp(-p^m A)^T mod p^N for each ad matrix A."""
    out = []
    for A in ads:
        negA = [[-x for x in row] for row in A]
        E = _exp_scaled(negA, p, m, N)
        out.append(np.array(E, dtype=np.int64).T.copy())
    return out


def _orbit_scan(acting, p: int, N: int, d: int, budget: int):
    """Deterministic BFS orbit partition of (Z/p^N)^d under the given matrices.

    Returns (reps, sizes) as int64 arrays; reps are the minimal encodings.
    """
    total = p ** (N * d)
    if total > budget:
        raise BudgetExceeded(f"state space {total} exceeds budget {budget}")
    mod = p**N
    radix = np.array([mod**i for i in range(d)], dtype=np.int64)
    big = np.concatenate([g.T for g in acting], axis=1)  # coords @ big -> all images
    visited = np.zeros(total, dtype=bool)
    reps: list[int] = []
    sizes: list[int] = []
    chunk = 1 << 16
    pos = 0
    while pos < total:
        stop = min(pos + chunk, total)
        for local in np.flatnonzero(~visited[pos:stop]):
            seed = pos + int(local)
            if visited[seed]:
                continue
            visited[seed] = True
            frontier = np.array([seed], dtype=np.int64)
            size = 0
            while frontier.size:
                size += frontier.size
                coords = (frontier[:, None] // radix) % mod
                nxt = (coords @ big) % mod
                codes = nxt.reshape(-1, len(acting), d) @ radix
                codes = np.unique(codes.ravel())
                codes = codes[~visited[codes]]
                visited[codes] = True
                frontier = codes
            reps.append(seed)
            sizes.append(size)
        pos = stop
    return np.array(reps, dtype=np.int64), np.array(sizes, dtype=np.int64)


def _levels_of(reps: np.ndarray, p: int, N: int, d: int) -> np.ndarray:
    """Exact order exponent of each dual vector: N minus min coordinate valuation."""
    mod = p**N
    radix = np.array([mod**i for i in range(d)], dtype=np.int64)
    coords = (reps[:, None] // radix) % mod
    vals = np.zeros(coords.shape, dtype=np.int64)
    tmp = coords.copy()
    for _ in range(N):
        mask = (tmp % p == 0) & (tmp != 0)
        vals[mask] += 1
        tmp[mask] //= p
    vals[coords == 0] = N
    return N - vals.min(axis=1)


@dataclass(frozen=True)
class OrbitCensus:
    """Per-level multiset of coadjoint orbit sizes (full Kirillov census)."""

    group: str
    prime: int
    level: int  # N
    dim: int
    by_level: tuple[tuple[int, tuple[tuple[int, int], ...]], ...]  # (level, ((size, count), ...))
    relative: bool = False

    def size_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, pairs in self.by_level:
            for size, cnt in pairs:
                out[size] = out.get(size, 0) + cnt
        return out

    def _dim_exponent(self, size: int) -> int:
        v = _vp(size, self.prime) if size > 1 else 0
        if size != self.prime**v:
            raise OddOrbitExponent(f"orbit size {size} is not a p power")
        if not self.relative:
            if v % 2:
                raise OddOrbitExponent(f"orbit size {size} has odd exponent")
            return v // 2
        return v

    def _min_top_size(self) -> int | None:
        for lvl, pairs in self.by_level:
            if lvl == self.level and pairs:
                return min(size for size, _ in pairs)
        return None

    def final_prefix(self) -> int:
        """Largest k such that r_{p^j} is final for all j <= k (may be -1)."""
        top = self._min_top_size()
        if top is None:
            k = -1
            for size in self.size_counts():
                k = max(k, self._dim_exponent(size))
            return k
        k = -1
        step = 2 if not self.relative else 1
        while self.prime ** (step * (k + 1)) < top:
            k += 1
        return k

    def r_counts(self) -> dict[int, tuple[int, bool]]:
        """{k: (r_{p^k}, final)} dense on the final prefix."""
        kfin = self.final_prefix()
        out: dict[int, tuple[int, bool]] = {}
        for k in range(kfin + 1):
            out[k] = (0, True)
        for size, cnt in sorted(self.size_counts().items()):
            k = self._dim_exponent(size)
            old = out.get(k, (0, k <= kfin))
            out[k] = (old[0] + cnt, k <= kfin)
        return dict(sorted(out.items()))

    def r(self, k: int) -> int:
        got = self.r_counts().get(k)
        if got is None:
            return 0
        return got[0]

    def is_final(self, k: int) -> bool:
        return k <= self.final_prefix()

    def render(self) -> str:
        lines = ["level | orbit size | count"]
        for lvl, pairs in self.by_level:
            for size, cnt in pairs:
                lines.append(f"{lvl:5d} | {size:10d} | {cnt}")
        lines.append("dimension | r | final?")
        for k, (cnt, fin) in self.r_counts().items():
            dim = self.prime**k
            lines.append(f"q^{k} = {dim} | {cnt} | {'yes' if fin else 'no'}")
        return "\n".join(lines)


RelativeCensus = OrbitCensus  # same carrier; relative flag switches semantics


def _build_census(group, p, N, d, reps, sizes, relative) -> OrbitCensus:
    total = int(sizes.sum())
    if total != p ** (N * d):
        raise OddOrbitExponent("orbit sizes do not partition the state space")
    levels = _levels_of(reps, p, N, d)
    by_level: dict[int, dict[int, int]] = {}
    for lvl, size in zip(levels.tolist(), sizes.tolist()):
        by_level.setdefault(lvl, {})
        by_level[lvl][size] = by_level[lvl].get(size, 0) + 1
    packed = tuple(
        (lvl, tuple(sorted(by_level[lvl].items()))) for lvl in sorted(by_level)
    )
    census = OrbitCensus(group, p, N, d, packed, relative)
    for size in census.size_counts():
        census._dim_exponent(size)  # parity / p-power invariant
    mins = [min(s for s, _ in pairs) for _, pairs in packed]
    assert all(a <= b for a, b in zip(mins, mins[1:])), \
        "level monotonicity violated"
    return census


def full_census(spec: LatticeSpec, N: int, budget: int | None = None,
                workers: int = 1) -> OrbitCensus:
    """Coadjoint orbit census of the congruence quotient at level N."""
    _check_oracle_scope(spec, N)
    if not potency_check(spec, spec.level_m):
        raise NotPotent(f"{spec.name} is not potent at level m={spec.level_m}")
    if workers < 1:
        raise InvalidParams("workers must be >= 1")
    p, m, d = spec.prime, spec.level_m, spec.dim
    ads = [_ad_matrix(spec, i) for i in range(d)]
    acting = _contragredients(d, ads, p, m, N)
    reps, sizes = _orbit_scan(acting, p, N, d, budget or default_budget())
    return _build_census(spec.name, p, N, d, reps, sizes, relative=False)


def relative_census(sd: SemidirectSpec, N: int, budget: int | None = None,
                    workers: int = 1) -> OrbitCensus:
    """Orbits of the base group on module duals mod p^N."""
    spec = sd.base
    _check_oracle_scope(spec, N)
    if not potency_check(sd.lattice, spec.level_m):
        raise NotPotent(f"{sd.name} is not potent at level m={spec.level_m}")
    p, m, n = spec.prime, spec.level_m, sd.module_rank
    acting = _contragredients(n, [[list(r) for r in M] for M in sd.action], p, m, N)
    reps, sizes = _orbit_scan(acting, p, N, n, budget or default_budget())
    return _build_census(f"{sd.name}|module", p, N, n, reps, sizes, relative=True)


# -- derived checks -------------------------------------------------------------

@dataclass(frozen=True)
class CensusSeries:
    values: tuple[int, ...]
    final: tuple[bool, ...]

    def render(self) -> str:
        rows = []
        for k, (v, fin) in enumerate(zip(self.values, self.final)):
            rows.append(f"t^{k}: {v}{'' if fin else ' (not final)'}")
        return "\n".join(rows)


def census_to_series(census: OrbitCensus) -> CensusSeries:
    rc = census.r_counts()
    if not rc:
        return CensusSeries((), ())
    kmax = max(rc)
    vals = tuple(rc.get(k, (0, False))[0] for k in range(kmax + 1))
    fins = tuple(rc.get(k, (0, False))[1] for k in range(kmax + 1))
    return CensusSeries(vals, fins)


def convolution_check(full: OrbitCensus, relative: OrbitCensus,
                      base: OrbitCensus, upto: int | None = None):
    """Verify r_n(G) = sum_{ab=n} r_a(G,H) * a * r_b(H) on final coefficients."""
    p = full.prime
    kmax = min(full.final_prefix(), relative.final_prefix(), base.final_prefix())
    if upto is not None:
        if upto > kmax:
            raise NonFinalCoefficient(
                f"coefficient q^{upto} is not final in all three censuses"
            )
        kmax = upto
    rows = []
    for k in range(kmax + 1):
        lhs = full.r(k)
        rhs = sum(relative.r(i) * p**i * base.r(k - i) for i in range(k + 1))
        rows.append((k, lhs, rhs, lhs == rhs))
    return rows


@dataclass(frozen=True)
class RatioResult:
    constant: Fraction | None
    witness: int | None

    @property
    def is_constant(self) -> bool:
        return self.constant is not None


def thetyspectral_ratio(a: OrbitCensus, b: OrbitCensus) -> RatioResult:
    """Constant lambda with r(a) = lambda * r(b) on jointly final coefficients."""
    kmax = min(a.final_prefix(), b.final_prefix())
    if kmax < 0:
        raise NonFinalCoefficient("no jointly final coefficients to compare")
    lam: Fraction | None = None
    for k in range(kmax + 1):
        ra, rb = a.r(k), b.r(k)
        if ra == 0 and rb == 0:
            continue
        if rb == 0 or ra == 0:
            return RatioResult(None, k)
        ratio = Fraction(ra, rb)
        if lam is None:
            lam = ratio
        elif ratio != lam:
            return RatioResult(None, k)
    return RatioResult(lam, None)
