"""Lie lattices over unramified discrete valuation rings, by structure constants.

A lattice is a free Z-module with an integer bracket table; the prime, the
residue degree f (residue field q = p^f) and the congruence level m are
carried as metadata.  Structure constants are stored unscaled: the pi^m
scaling enters downstream only through prefactors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    InvalidParams,
    NotAHomomorphism,
    NotClosedUnderBracket,
    NotFaithful,
    SpecFileError,
)
from .minors import CommMatrix, LinearForm

Matrix = tuple[tuple[int, ...], ...]


def _as_matrix(rows) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


@dataclass(frozen=True)
class LatticeSpec:
    name: str
    dim: int
    basis: tuple[str, ...]
    brackets: tuple[tuple[tuple[int, ...], ...], ...]  # c[i][j][k]
    prime: int
    residue_degree: int = 1
    level_m: int = 1

    def __post_init__(self):
        if self.prime < 2:
            raise InvalidParams("prime must be >= 2")
        if self.residue_degree < 1 or self.level_m < 0:
            raise InvalidParams("bad residue degree or level")
        if len(self.basis) != self.dim or len(set(self.basis)) != self.dim:
            raise InvalidParams("basis labels must be distinct and match dim")

    def index(self, label: str) -> int:
        return self.basis.index(label)

    def bracket(self, i: int, j: int) -> tuple[int, ...]:
        return self.brackets[i][j]

    def bracket_of_vectors(self, v, w) -> list:
        """[v, w] for coordinate vectors with entries int or Fraction."""
        out = [0] * self.dim
        for i, vi in enumerate(v):
            if not vi:
                continue
            for j, wj in enumerate(w):
                if not wj:
                    continue
                row = self.brackets[i][j]
                for k in range(self.dim):
                    if row[k]:
                        out[k] += vi * wj * row[k]
        return out


@dataclass(frozen=True)
class SemidirectSpec:
    """A base lattice together with a faithful action on an abelian module."""

    base: LatticeSpec
    module_rank: int
    action: tuple[Matrix, ...]  # one module_rank x module_rank matrix per base basis element
    module_labels: tuple[str, ...]
    lattice: LatticeSpec = field(compare=False)

    @property
    def name(self) -> str:
        return self.lattice.name


@dataclass(frozen=True)
class BasisChange:
    """Column j of xi holds the coordinates of the new j-th basis vector."""

    xi: Matrix
    description: str = ""


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = "ok"
    triple: tuple[str, ...] = ()


def make_lattice(name, basis, bracket_table, prime, residue_degree=1, level_m=1) -> LatticeSpec:
    """bracket_table: {(label_i, label_j): {label_k: coeff}} for i-index < j-index."""
    basis = tuple(basis)
    d = len(basis)
    c = [[[0] * d for _ in range(d)] for _ in range(d)]
    for (li, lj), coeffs in bracket_table.items():
        i, j = basis.index(li), basis.index(lj)
        for lk, v in coeffs.items():
            k = basis.index(lk)
            c[i][j][k] = int(v)
            c[j][i][k] = -int(v)
    return LatticeSpec(
        name, d, basis,
        tuple(tuple(tuple(row) for row in plane) for plane in c),
        prime, residue_degree, level_m,
    )


# -- validation ----------------------------------------------------------------

def validate_lie(spec: LatticeSpec) -> ValidationReport:
    d = spec.dim
    for i in range(d):
        for j in range(d):
            for k in range(d):
                if spec.brackets[i][j][k] != -spec.brackets[j][i][k]:
                    return ValidationReport(
                        False, "antisymmetry fails",
                        (spec.basis[i], spec.basis[j]),
                    )
    unit = [[1 if a == b else 0 for b in range(d)] for a in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            vij = spec.bracket_of_vectors(unit[i], unit[j])
            for k in range(j + 1, d):
                t1 = spec.bracket_of_vectors(vij, unit[k])
                vjk = spec.bracket_of_vectors(unit[j], unit[k])
                t2 = spec.bracket_of_vectors(vjk, unit[i])
                vki = spec.bracket_of_vectors(unit[k], unit[i])
                t3 = spec.bracket_of_vectors(vki, unit[j])
                if any(t1[a] + t2[a] + t3[a] for a in range(d)):
                    return ValidationReport(
                        False, "Jacobi identity fails",
                        (spec.basis[i], spec.basis[j], spec.basis[k]),
                    )
    return ValidationReport(True)


# -- linear algebra over Q ------------------------------------------------------

def _rank(rows: list[list[Fraction]]) -> int:
    rows = [list(map(Fraction, r)) for r in rows if any(r)]
    rank = 0
    cols = len(rows[0]) if rows else 0
    pivot_col = 0
    while rows and pivot_col < cols:
        pivot = next((r for r in rows if r[pivot_col]), None)
        if pivot is None:
            pivot_col += 1
            continue
        rows.remove(pivot)
        rank += 1
        for r in rows:
            if r[pivot_col]:
                f = r[pivot_col] / pivot[pivot_col]
                for c in range(pivot_col, cols):
                    r[c] -= f * pivot[c]
        rows = [r for r in rows if any(r)]
        pivot_col += 1
    return rank


def _solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """One solution of mat * x = rhs over Q, or None if inconsistent."""
    n, m = len(mat), len(mat[0]) if mat else 0
    aug = [list(map(Fraction, mat[i])) + [Fraction(rhs[i])] for i in range(n)]
    piv_of_col: dict[int, int] = {}
    r = 0
    for c in range(m):
        pr = next((i for i in range(r, n) if aug[i][c]), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(n):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        piv_of_col[c] = r
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if aug[i][m]:
            return None
    x = [Fraction(0)] * m
    for c, i in piv_of_col.items():
        x[c] = aug[i][m]
    return x


def _det(mat: list[list[Fraction]]) -> Fraction:
    m = [list(map(Fraction, row)) for row in mat]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c]), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                for j in range(c, n):
                    m[i][j] -= f * m[c][j]
    return det


# -- constructions ---------------------------------------------------------------

def semidirect(base: LatticeSpec, module_rank: int, action: dict[str, Matrix],
               module_labels=None, name=None) -> LatticeSpec:
    """Extend base by an abelian module: [x, v] = sigma(x) v, [v, v'] = 0."""
    sd = make_semidirect(base, module_rank, action, module_labels, name)
    return sd.lattice


def make_semidirect(base: LatticeSpec, module_rank: int, action: dict[str, Matrix],
                    module_labels=None, name=None) -> SemidirectSpec:
    n = module_rank
    if n < 1:
        raise InvalidParams("module rank must be >= 1")
    if set(action) != set(base.basis):
        raise SpecFileError("action must give one matrix per base basis label")
    mats = tuple(_as_matrix(action[lbl]) for lbl in base.basis)
    for M in mats:
        if len(M) != n or any(len(r) != n for r in M):
            raise SpecFileError("action matrices must be module_rank x module_rank")

    def mat_mul(A, B):
        return tuple(
            tuple(sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n))
            for i in range(n)
        )

    def mat_sub(A, B):
        return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))

    d = base.dim
    for i in range(d):
        for j in range(d):
            expect = [[0] * n for _ in range(n)]
            for k in range(d):
                c = base.brackets[i][j][k]
                if c:
                    for a in range(n):
                        for b in range(n):
                            expect[a][b] += c * mats[k][a][b]
            got = mat_sub(mat_mul(mats[i], mats[j]), mat_mul(mats[j], mats[i]))
            if _as_matrix(expect) != got:
                raise NotAHomomorphism(
                    f"sigma([{base.basis[i]},{base.basis[j]}]) != [sigma,sigma]"
                )
    flat = [[Fraction(mats[i][a][b]) for a in range(n) for b in range(n)] for i in range(d)]
    if _rank(flat) != d:
        raise NotFaithful("action matrices are linearly dependent over Q")

    if module_labels is None:
        module_labels = tuple(f"m{i+1}" for i in range(n))
    module_labels = tuple(module_labels)
    if len(module_labels) != n or set(module_labels) & set(base.basis):
        raise SpecFileError("module labels must be fresh and match module_rank")

    dd = d + n
    c = [[[0] * dd for _ in range(dd)] for _ in range(dd)]
    for i in range(d):
        for j in range(d):
            for k in range(d):
                c[i][j][k] = base.brackets[i][j][k]
    for i in range(d):
        for a in range(n):
            for b in range(n):
                v = mats[i][b][a]  # [x_i, v_a] = sum_b sigma_i[b][a] v_b
                if v:
                    c[i][d + a][d + b] = v
                    c[d + a][i][d + b] = -v
    lat = LatticeSpec(
        name or f"{base.name}+O^{n}",
        dd, base.basis + module_labels,
        tuple(tuple(tuple(row) for row in plane) for plane in c),
        base.prime, base.residue_degree, base.level_m,
    )
    return SemidirectSpec(base, n, mats, module_labels, lat)


def sublattice(spec: LatticeSpec, change: BasisChange, name=None) -> LatticeSpec:
    xi = change.xi
    d = spec.dim
    if len(xi) != d or any(len(r) != d for r in xi):
        raise InvalidParams("xi must be a square matrix of the lattice dimension")
    if any(x != int(x) for row in xi for x in row):
        raise NotClosedUnderBracket("xi does not map the standard lattice into itself")
    cols = [[Fraction(xi[i][j]) for i in range(d)] for j in range(d)]
    if _det([list(r) for r in xi]) == 0:
        raise InvalidParams("xi is singular")
    mat = [[Fraction(xi[i][j]) for j in range(d)] for i in range(d)]
    c = [[[0] * d for _ in range(d)] for _ in range(d)]
    for a in range(d):
        for b in range(a + 1, d):
            v = spec.bracket_of_vectors(cols[a], cols[b])
            w = _solve(mat, [Fraction(x) for x in v])
            if w is None or any(x.denominator != 1 for x in w):
                raise NotClosedUnderBracket(
                    f"[{spec.basis[a]}', {spec.basis[b]}'] leaves the image lattice"
                )
            for k in range(d):
                c[a][b][k] = int(w[k])
                c[b][a][k] = -int(w[k])
    return LatticeSpec(
        name or f"{spec.name}|sub",
        d, spec.basis,
        tuple(tuple(tuple(row) for row in plane) for plane in c),
        spec.prime, spec.residue_degree, spec.level_m,
    )


def commutator_matrix(spec: LatticeSpec, rows, cols) -> CommMatrix:
    """Matrix of dual-coefficient vectors [x, y]^* for x in rows, y in cols."""
    rows, cols = tuple(rows), tuple(cols)
    for lbl in rows + cols:
        if lbl not in spec.basis:
            raise InvalidParams(f"unknown basis label {lbl!r}")
    entries = []
    for rl in rows:
        i = spec.index(rl)
        entries.append(tuple(
            LinearForm(tuple(spec.brackets[i][spec.index(cl)])) for cl in cols
        ))
    return CommMatrix(rows, cols, spec.basis, tuple(entries))


# -- predicates -------------------------------------------------------------------

def is_FAb(spec: LatticeSpec) -> bool:
    """True iff the brackets span the whole lattice over Q (perfect algebra)."""
    rows = []
    for i in range(spec.dim):
        for j in range(i + 1, spec.dim):
            row = spec.brackets[i][j]
            if any(row):
                rows.append([Fraction(x) for x in row])
    return bool(rows) and _rank(rows) == spec.dim


def permissible(spec: LatticeSpec, m: int) -> bool:
    """Sufficient congruence-level bound, unramified case e = 1."""
    if m < 1:
        return False
    if spec.prime == 2:
        return m >= 2
    # odd p: m >= e/(p-2) = 1/(p-2), so any positive integer level works
    return True


def soundly_permissible(spec: LatticeSpec, m: int) -> bool:
    """Stronger bound covering every faithful semidirect extension (e = 1)."""
    if m < 1:
        return False
    return m >= (2 if spec.prime == 2 else 1)


def _integer_row_reduce(rows: list[list[int]]) -> list[list[int]]:
    """Hermite-style integer row basis of the lattice spanned by rows."""
    rows = [r[:] for r in rows if any(r)]
    basis: list[list[int]] = []
    ncols = len(rows[0]) if rows else 0
    col = 0
    while rows and col < ncols:
        rows.sort(key=lambda r: (r[col] == 0, abs(r[col]) if r[col] else 0))
        if rows[0][col] == 0:
            col += 1
            continue
        changed = False
        p = rows[0]
        for r in rows[1:]:
            if r[col]:
                f = r[col] // p[col]
                if f:
                    for c in range(ncols):
                        r[c] -= f * p[c]
                    changed = True
        if not changed:
            basis.append(p)
            rows = [r for r in rows[1:] if any(r)]
            col += 1
    return basis


def potency_check(spec: LatticeSpec, m: int) -> bool:
    """gamma_{p-1}(p^m g) inside p * p^m g (p odd), gamma_2 inside 4 * 2^m g (p = 2)."""
    if m < 0:
        return False
    p = spec.prime
    length = 2 if p == 2 else p - 1
    modulus = p ** (m + 2) if p == 2 else p ** (m + 1)
    d = spec.dim
    scale = p**m
    unit = [[scale if a == b else 0 for b in range(d)] for a in range(d)]
    layer = [r[:] for r in unit]
    for _ in range(length - 1):
        nxt = []
        for v in layer:
            for j in range(d):
                w = spec.bracket_of_vectors(v, unit[j])
                if any(w):
                    nxt.append([int(x) for x in w])
        layer = _integer_row_reduce(nxt)
        if not layer:
            return True
    return all(x % modulus == 0 for row in layer for x in row)


# -- builtins ----------------------------------------------------------------------

def builtin_sl2(p: int, f: int = 1, m: int = 1) -> LatticeSpec:
    return make_lattice(
        "sl2", ("h", "e", "f"),
        {("h", "e"): {"e": 2}, ("h", "f"): {"f": -2}, ("e", "f"): {"h": 1}},
        p, f, m,
    )


def _sl3_basis_matrices():
    def E(i, j):
        M = [[0] * 3 for _ in range(3)]
        M[i][j] = 1
        return M

    def sub(A, B):
        return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]

    return {
        "h12": sub(E(0, 0), E(1, 1)),
        "h23": sub(E(1, 1), E(2, 2)),
        "e12": E(0, 1),
        "e13": E(0, 2),
        "e23": E(1, 2),
        "f21": E(1, 0),
        "f31": E(2, 0),
        "f32": E(2, 1),
    }


def builtin_sl3(p: int, f: int = 1, m: int = 1) -> LatticeSpec:
    mats = _sl3_basis_matrices()
    labels = ("h12", "h23", "e12", "e13", "e23", "f21", "f31", "f32")

    def comm(A, B):
        def mul(X, Y):
            return [[sum(X[i][k] * Y[k][j] for k in range(3)) for j in range(3)]
                    for i in range(3)]
        AB, BA = mul(A, B), mul(B, A)
        return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(AB, BA)]

    def coords(X):
        a, b = X[0][0], -X[2][2]
        return {
            "h12": a, "h23": b,
            "e12": X[0][1], "e13": X[0][2], "e23": X[1][2],
            "f21": X[1][0], "f31": X[2][0], "f32": X[2][1],
        }

    table = {}
    for i, li in enumerate(labels):
        for lj in labels[i + 1:]:
            cs = coords(comm(mats[li], mats[lj]))
            cs = {k: v for k, v in cs.items() if v}
            if cs:
                table[(li, lj)] = cs
    return make_lattice("sl3", labels, table, p, f, m)


_NATURAL_BLOCKS = {
    "h": ((1, 0), (0, -1)),
    "e": ((0, 1), (0, 0)),
    "f": ((0, 0), (1, 0)),
}

_SYM2_BLOCKS = {
    "h": ((2, 0, 0), (0, 0, 0), (0, 0, -2)),
    "e": ((0, 2, 0), (0, 0, 1), (0, 0, 0)),
    "f": ((0, 0, 0), (1, 0, 0), (0, 2, 0)),
}


def _diag_power_action(blocks: dict, n: int) -> dict[str, Matrix]:
    size = len(next(iter(blocks.values())))
    out = {}
    for lbl, blk in blocks.items():
        M = [[0] * (size * n) for _ in range(size * n)]
        for c in range(n):
            for i in range(size):
                for j in range(size):
                    M[c * size + i][c * size + j] = blk[i][j]
        out[lbl] = _as_matrix(M)
    return out


def builtin_natural(n: int, p: int, f: int = 1, m: int = 1) -> SemidirectSpec:
    if n < 1:
        raise InvalidParams("n must be >= 1")
    base = builtin_sl2(p, f, m)
    labels = tuple(x for i in range(1, n + 1) for x in (f"u{i}", f"v{i}"))
    return make_semidirect(
        base, 2 * n, _diag_power_action(_NATURAL_BLOCKS, n), labels,
        name=f"natural:n={n}",
    )


def builtin_sym2(n: int, p: int, f: int = 1, m: int = 1) -> SemidirectSpec:
    if n < 1:
        raise InvalidParams("n must be >= 1")
    base = builtin_sl2(p, f, m)
    labels = tuple(x for i in range(1, n + 1) for x in (f"u{i}", f"v{i}", f"w{i}"))
    return make_semidirect(
        base, 3 * n, _diag_power_action(_SYM2_BLOCKS, n), labels,
        name=f"sym2:n={n}",
    )


def builtin_sk(k: int, p: int, f: int = 1, m: int = 1) -> LatticeSpec:
    """Sublattice of sl2 spanned by p^k h, e, p^k f."""
    if k < 0:
        raise InvalidParams("k must be >= 0")
    pk = p**k
    xi = ((pk, 0, 0), (0, 1, 0), (0, 0, pk))
    return sublattice(builtin_sl2(p, f, m), BasisChange(xi), name=f"sk:k={k}")


def builtin_hk(k: int, p: int, f: int = 1) -> SemidirectSpec:
    """The stabiliser-type subgroup lattice: base sk, natural module action."""
    if k < 0:
        raise InvalidParams("k must be >= 0")
    base = builtin_sk(k, p, f, m=1)
    pk = p**k
    action = {
        "h": ((pk, 0), (0, -pk)),
        "e": ((0, 1), (0, 0)),
        "f": ((0, 0), (pk, 0)),
    }
    return make_semidirect(base, 2, action, ("u", "v"), name=f"hk:k={k}")


def load_builtin(selector: str, p: int, f: int = 1, m: int = 1):
    """Resolve builtin:NAME[:key=value] selectors."""
    parts = selector.split(":")
    if parts[0] != "builtin":
        raise SpecFileError(f"not a builtin selector: {selector!r}")
    kind = parts[1] if len(parts) > 1 else ""
    kw = {}
    for piece in parts[2:]:
        if "=" not in piece:
            raise SpecFileError(f"malformed builtin parameter {piece!r}")
        key, val = piece.split("=", 1)
        kw[key] = int(val)
    if kind == "sl2":
        return builtin_sl2(p, f, m)
    if kind == "sl3":
        return builtin_sl3(p, f, m)
    if kind == "natural":
        return builtin_natural(kw.get("n", 1), p, f, m)
    if kind == "sym2":
        return builtin_sym2(kw.get("n", 1), p, f, m)
    if kind == "sk":
        return builtin_sk(kw.get("k", 1), p, f, m)
    if kind == "hk":
        return builtin_hk(kw.get("k", 1), p, f)
    raise SpecFileError(f"unknown builtin {kind!r}")


_TOP_FIELDS = {"name", "prime", "residue_degree", "level_m", "basis", "brackets",
               "module_rank", "action"}
_BRACKET_FIELDS = {"i", "j", "coeffs"}


def load_spec_file(path: str):
    """Load a lattice (or semidirect) description from a UTF-8 JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFileError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecFileError("top level must be an object")
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise SpecFileError(f"unknown fields: {sorted(unknown)}")
    for req in ("name", "prime", "basis", "brackets"):
        if req not in data:
            raise SpecFileError(f"missing field {req!r}")
    basis = tuple(data["basis"])
    table = {}
    seen = set()
    for entry in data["brackets"]:
        if set(entry) - _BRACKET_FIELDS or {"i", "j", "coeffs"} - set(entry):
            raise SpecFileError(f"malformed bracket entry {entry!r}")
        li, lj = entry["i"], entry["j"]
        if li not in basis or lj not in basis or li == lj:
            raise SpecFileError(f"bad bracket pair ({li!r}, {lj!r})")
        key = frozenset((li, lj))
        if key in seen:
            raise SpecFileError(f"duplicate bracket pair ({li!r}, {lj!r})")
        seen.add(key)
        coeffs = entry["coeffs"]
        if any(k not in basis for k in coeffs):
            raise SpecFileError(f"bracket coefficients use unknown labels: {coeffs}")
        if basis.index(li) > basis.index(lj):
            li, lj = lj, li
            coeffs = {k: -v for k, v in coeffs.items()}
        table[(li, lj)] = coeffs
    spec = make_lattice(
        data["name"], basis, table, int(data["prime"]),
        int(data.get("residue_degree", 1)), int(data.get("level_m", 1)),
    )
    report = validate_lie(spec)
    if not report.ok:
        raise SpecFileError(f"{report.message} at {report.triple}")
    if "module_rank" in data or "action" in data:
        if "module_rank" not in data or "action" not in data:
            raise SpecFileError("module_rank and action must be given together")
        return make_semidirect(
            spec, int(data["module_rank"]),
            {k: _as_matrix(v) for k, v in data["action"].items()},
            name=data["name"],
        )
    return spec


def load_spec(source: str, p: int | None = None, f: int = 1, m: int = 1):
    """Builtin selector or JSON file path."""
    if source.startswith("builtin:"):
        if p is None:
            raise SpecFileError("builtin specs need an explicit prime (--p)")
        return load_builtin(source, p, f, m)
    return load_spec_file(source)
