"""Pfaffian minors and rectangular minors of commutator matrices.

The output type is a PolySet: sign-normalised multivariate polynomials over
the dual coordinates, each coefficient split as (unit coprime to p) * p^pexp.
The constant 1 (the empty minor) is always a member; the p-adic integral
only converges as printed with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from .errors import InvalidParams, NotSkew

# internal polynomial: {exponent tuple: int coefficient}
RawPoly = dict[tuple[int, ...], int]
# stored term: (exponent tuple, unit, pexp)
Term = tuple[tuple[int, ...], int, int]
PPoly = tuple[Term, ...]


@dataclass(frozen=True)
class LinearForm:
    """Dual-coefficient vector of a bracket, length = ambient dimension."""

    coeffs: tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __neg__(self):
        return LinearForm(tuple(-c for c in self.coeffs))


@dataclass(frozen=True)
class CommMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    space: tuple[str, ...]  # ambient basis labels; forms live in its dual
    entries: tuple[tuple[LinearForm, ...], ...]

    def entry(self, i: int, j: int) -> LinearForm:
        return self.entries[i][j]

    def transpose(self) -> "CommMatrix":
        ent = tuple(
            tuple(self.entries[i][j] for i in range(len(self.rows)))
            for j in range(len(self.cols))
        )
        return CommMatrix(self.cols, self.rows, self.space, ent)

    def negate(self) -> "CommMatrix":
        ent = tuple(tuple(-e for e in row) for row in self.entries)
        return CommMatrix(self.rows, self.cols, self.space, ent)


def _form_to_poly(form: LinearForm) -> RawPoly:
    d = len(form.coeffs)
    out: RawPoly = {}
    for i, c in enumerate(form.coeffs):
        if c:
            exps = [0] * d
            exps[i] = 1
            out[tuple(exps)] = c
    return out


def _poly_mul(a: RawPoly, b: RawPoly) -> RawPoly:
    out: RawPoly = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            k = tuple(x + y for x, y in zip(e1, e2))
            s = out.get(k, 0) + c1 * c2
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def _poly_add(a: RawPoly, b: RawPoly, sign: int = 1) -> RawPoly:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) + sign * c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _split_coeff(c: int, p: int) -> tuple[int, int]:
    e = 0
    while c % p == 0:
        c //= p
        e += 1
    return c, e


def _normalize(poly: RawPoly, p: int, pshift: int = 0) -> PPoly | None:
    """Sign-normalise and split coefficients; None for the zero polynomial."""
    if not poly:
        return None
    lead = max(poly)
    sign = 1 if poly[lead] > 0 else -1
    terms = []
    for exps in sorted(poly):
        unit, pexp = _split_coeff(sign * poly[exps], p)
        terms.append((exps, unit, pexp + pshift))
    return tuple(terms)


@dataclass(frozen=True)
class PolySet:
    variables: tuple[str, ...]
    prime: int
    polys: frozenset[PPoly]

    def __len__(self):
        return len(self.polys)

    def __contains__(self, item):
        return item in self.polys

    def sorted_polys(self) -> list[PPoly]:
        def keyfn(poly: PPoly):
            deg = max(sum(t[0]) for t in poly)
            return (deg, poly)
        return sorted(self.polys, key=keyfn)

    def max_degree(self) -> int:
        return max(max(sum(t[0]) for t in poly) for poly in self.polys)

    def render(self) -> str:
        return "\n".join(render_ppoly(p, self.variables) for p in self.sorted_polys())


def render_ppoly(poly: PPoly, variables: tuple[str, ...]) -> str:
    parts = []
    for exps, unit, pexp in poly:
        factors = []
        if abs(unit) != 1 or (not any(exps) and pexp == 0):
            factors.append(str(abs(unit)))
        if pexp:
            factors.append(f"p^{pexp}")
        for v, e in zip(variables, exps):
            if e:
                factors.append(v if e == 1 else f"{v}^{e}")
        mon = "*".join(factors) or "1"
        if not parts:
            parts.append(mon if unit > 0 else "-" + mon)
        else:
            parts.append(("+ " if unit > 0 else "- ") + mon)
    return " ".join(parts)


def make_ppoly(p: int, terms) -> PPoly:
    """Construct a sign-normalised PPoly from ((exps, unit, pexp), ...)."""
    poly: RawPoly = {}
    shift = min(t[2] for t in terms)
    for exps, unit, pexp in terms:
        poly[tuple(exps)] = poly.get(tuple(exps), 0) + unit * p ** (pexp - shift)
    out = _normalize(poly, p, pshift=shift)
    if out is None:
        raise InvalidParams("zero polynomial in PolySet constructor")
    return out


def _one(nvars: int) -> PPoly:
    return (((0,) * nvars, 1, 0),)


def pfaffian_minor_set(M: CommMatrix, p: int) -> PolySet:
    """Pfaffians of all even principal submatrices (size 0 included)."""
    n = len(M.rows)
    if M.rows != M.cols:
        raise NotSkew("rows and cols differ")
    entry_polys: list[list[RawPoly]] = [
        [_form_to_poly(M.entries[i][j]) for j in range(n)] for i in range(n)
    ]
    for i in range(n):
        if entry_polys[i][i]:
            raise NotSkew("nonzero diagonal entry")
        for j in range(i + 1, n):
            if _poly_add(entry_polys[i][j], entry_polys[j][i]):
                raise NotSkew(f"entry ({i},{j}) is not skew")

    nvars = len(M.space)
    pf: dict[int, RawPoly] = {0: {(0,) * nvars: 1}}

    def pf_of(mask: int) -> RawPoly:
        if mask in pf:
            return pf[mask]
        idx = [i for i in range(n) if mask >> i & 1]
        i0 = idx[0]
        rest = [j for j in idx if j != i0]
        acc: RawPoly = {}
        for pos, j in enumerate(rest):
            e = entry_polys[i0][j]
            if e:
                sub = pf_of(mask & ~(1 << i0) & ~(1 << j))
                if sub:
                    acc = _poly_add(acc, _poly_mul(e, sub), 1 if pos % 2 == 0 else -1)
        pf[mask] = acc
        return acc

    found = {_one(nvars)}
    for mask in range(1, 1 << n):
        if bin(mask).count("1") % 2 == 0:
            norm = _normalize(pf_of(mask), p)
            if norm is not None:
                found.add(norm)
    return PolySet(M.space, p, frozenset(found))


def matrix_minor_set(M: CommMatrix, p: int) -> PolySet:
    """All minors of all sizes (0 included) of a rectangular commutator block."""
    from itertools import combinations

    nr, nc = len(M.rows), len(M.cols)
    nvars = len(M.space)
    entry_polys = [[_form_to_poly(M.entries[i][j]) for j in range(nc)] for i in range(nr)]

    def det(rows: tuple[int, ...], cols: tuple[int, ...]) -> RawPoly:
        if len(rows) == 1:
            return entry_polys[rows[0]][cols[0]]
        acc: RawPoly = {}
        r0 = rows[0]
        for pos, c in enumerate(cols):
            e = entry_polys[r0][c]
            if e:
                sub = det(rows[1:], tuple(x for x in cols if x != c))
                if sub:
                    acc = _poly_add(acc, _poly_mul(e, sub), 1 if pos % 2 == 0 else -1)
        return acc

    found = {_one(nvars)}
    for size in range(1, min(nr, nc) + 1):
        for rows in combinations(range(nr), size):
            for cols in combinations(range(nc), size):
                norm = _normalize(det(rows, cols), p)
                if norm is not None:
                    found.add(norm)
    return PolySet(M.space, p, frozenset(found))


# spec-surface aliases taking explicit primes
def pfaffian_minors(M: CommMatrix, p: int) -> PolySet:
    return pfaffian_minor_set(M, p)


def matrix_minors(M: CommMatrix, p: int) -> PolySet:
    return matrix_minor_set(M, p)


def restrict_variables(S: PolySet, keep: tuple[str, ...]) -> PolySet:
    """Set all dual variables outside `keep` to zero and reindex."""
    idx = [S.variables.index(v) for v in keep]
    drop = [i for i in range(len(S.variables)) if i not in idx]
    out = set()
    for poly in S.polys:
        acc: RawPoly = {}
        for exps, unit, pexp in poly:
            if any(exps[i] for i in drop):
                continue
            k = tuple(exps[i] for i in idx)
            acc[k] = acc.get(k, 0) + unit * S.prime**pexp
        norm = _normalize(acc, S.prime)
        if norm is not None:
            out.add(norm)
    return PolySet(tuple(keep), S.prime, frozenset(out))


def block_reduction_check(full: CommMatrix, block: CommMatrix, p: int) -> bool:
    """Pfaffian set of the full matrix, base duals zeroed, equals the block minors."""
    module_vars = tuple(v for v in full.space if v in block.rows or v in block.cols)
    pfset = pfaffian_minor_set(full, p)
    reduced = restrict_variables(pfset, module_vars)
    minors = restrict_variables(matrix_minor_set(block, p), module_vars)
    return reduced.polys == minors.polys


def rescale_set(S: PolySet, j: int) -> tuple[PolySet, int]:
    """Coefficient bookkeeping for w -> p^-j w: pexp -= j * monomial degree.

    Returns the rescaled set and the normalising exponent D*j, D = max total
    degree in S; norms are recomputed downstream, this is bookkeeping only.
    """
    if j < 0:
        raise InvalidParams("shell index must be >= 0")
    out = set()
    for poly in S.polys:
        out.add(tuple((exps, unit, pexp - j * sum(exps)) for exps, unit, pexp in poly))
    return PolySet(S.variables, S.prime, frozenset(out)), S.max_degree() * j
