"""Exact bivariate arithmetic in q (Laurent) and t = q^(-s).

Every printed zeta formula in this package is carried by :class:`RatFuncQT`,
a reduced quotient of two :class:`IntPoly2` values.  Coefficients are plain
Python integers, so all identities are decided exactly; evaluation returns
``fractions.Fraction``.

Monomial keys are ``(q_exponent, t_exponent)`` with the q exponent allowed to
be negative (several auxiliary forms carry q^{-j(n-1)}-style terms) and the
t exponent always >= 0.  Canonical term order is t-major, q-minor, ascending;
rendering in that order is byte-stable and used by golden tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd as _gcd

from .errors import (
    DegenerateAtQ1,
    InvalidParams,
    NoFactoredForm,
    NotExpandable,
    PoleAtPoint,
    ZeroDenominator,
)

Key = tuple[int, int]


def _canon_key(key: Key):
    return (key[1], key[0])


class IntPoly2:
    """Integer polynomial in t, Laurent in q.  Immutable after construction."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean: dict[Key, int] = {}
        if terms:
            for (a, b), c in (terms.items() if isinstance(terms, dict) else terms):
                if b < 0:
                    raise InvalidParams("t exponents must be >= 0")
                s = clean.get((a, b), 0) + int(c)
                if s:
                    clean[(a, b)] = s
                else:
                    clean.pop((a, b), None)
        object.__setattr__(self, "terms", clean)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "IntPoly2":
        return IntPoly2()

    @staticmethod
    def const(c: int) -> "IntPoly2":
        return IntPoly2({(0, 0): c} if c else {})

    @staticmethod
    def mono(c: int, a: int, b: int) -> "IntPoly2":
        return IntPoly2({(a, b): c} if c else {})

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def canon_items(self):
        return sorted(self.terms.items(), key=lambda kv: _canon_key(kv[0]))

    def q_valuation(self) -> int:
        if not self.terms:
            return 0
        return min(a for a, _ in self.terms)

    def t_degree(self) -> int:
        if not self.terms:
            return -1
        return max(b for _, b in self.terms)

    def t_slice(self, b: int) -> dict[int, int]:
        return {a: c for (a, bb), c in self.terms.items() if bb == b}

    def content(self) -> int:
        g = 0
        for c in self.terms.values():
            g = _gcd(g, c)
        return g

    def lead_sign(self) -> int:
        """Sign of the first term in canonical (ascending) order."""
        if not self.terms:
            return 0
        key = min(self.terms, key=_canon_key)
        return 1 if self.terms[key] > 0 else -1

    # -- arithmetic ----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, IntPoly2) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __neg__(self):
        return IntPoly2({k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        p = IntPoly2()
        object.__setattr__(p, "terms", out)
        return p

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly2({k: c * other for k, c in self.terms.items()} if other else {})
        out: dict[Key, int] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                k = (a1 + a2, b1 + b2)
                s = out.get(k, 0) + c1 * c2
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        p = IntPoly2()
        object.__setattr__(p, "terms", out)
        return p

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise InvalidParams("negative polynomial power")
        r = IntPoly2.const(1)
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def q_shift(self, s: int) -> "IntPoly2":
        return IntPoly2({(a + s, b): c for (a, b), c in self.terms.items()})

    def shift_t_to_qt(self) -> "IntPoly2":
        """Substitute t -> q t (the s -> s-1 shift on Dirichlet series)."""
        return IntPoly2({(a + b, b): c for (a, b), c in self.terms.items()})

    def subs_q_one(self) -> "IntPoly2":
        out: dict[Key, int] = {}
        for (a, b), c in self.terms.items():
            k = (0, b)
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        p = IntPoly2()
        object.__setattr__(p, "terms", out)
        return p

    def eval_q(self, qv: Fraction) -> dict[int, Fraction]:
        """Collapse q at a rational value; returns {t_exponent: value}."""
        out: dict[int, Fraction] = {}
        for (a, b), c in self.terms.items():
            out[b] = out.get(b, Fraction(0)) + c * qv**a
        return {b: v for b, v in out.items() if v}

    def eval(self, qv: Fraction, tv: Fraction) -> Fraction:
        total = Fraction(0)
        for (a, b), c in self.terms.items():
            total += c * qv**a * tv**b
        return total

    # -- rendering -----------------------------------------------------------

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b), c in self.canon_items():
            factors = []
            if abs(c) != 1 or (a == 0 and b == 0):
                factors.append(str(abs(c)))
            if a:
                factors.append("q" if a == 1 else f"q^{a}")
            if b:
                factors.append("t" if b == 1 else f"t^{b}")
            mon = "*".join(factors)
            if not parts:
                parts.append(mon if c > 0 else "-" + mon)
            else:
                parts.append(("+ " if c > 0 else "- ") + mon)
        return " ".join(parts)

    def __repr__(self):
        return f"IntPoly2({self.render()})"


ONE = IntPoly2.const(1)
Q = IntPoly2.mono(1, 1, 0)
T = IntPoly2.mono(1, 0, 1)


def qpow(a: int) -> IntPoly2:
    return IntPoly2.mono(1, a, 0)


def one_minus(a: int, b: int) -> IntPoly2:
    """The factor 1 - q^a t^b."""
    if b == 0:
        raise InvalidParams("factor requires positive t exponent")
    return ONE - IntPoly2.mono(1, a, b)


def poly_arith(lhs: IntPoly2, rhs: IntPoly2, kind: str) -> IntPoly2:
    if kind == "add":
        return lhs + rhs
    if kind == "sub":
        return lhs - rhs
    if kind == "mul":
        return lhs * rhs
    raise InvalidParams(f"unknown kind {kind!r}")


# -- exact division ----------------------------------------------------------

def try_divide(num: IntPoly2, div: IntPoly2) -> IntPoly2 | None:
    """Exact quotient num / div in Z[q, q^-1][t], or None if not divisible."""
    if div.is_zero():
        raise ZeroDenominator("division by zero polynomial")
    if num.is_zero():
        return IntPoly2.zero()
    lead = max(div.terms, key=_canon_key)
    lc = div.terms[lead]
    rem = dict(num.terms)
    quo: dict[Key, int] = {}
    while rem:
        nk = max(rem, key=_canon_key)
        nc = rem[nk]
        tb = nk[1] - lead[1]
        if tb < 0 or nc % lc:
            return None
        qk = (nk[0] - lead[0], tb)
        qc = nc // lc
        quo[qk] = qc
        for (a, b), c in div.terms.items():
            k = (a + qk[0], b + qk[1])
            s = rem.get(k, 0) - qc * c
            if s:
                rem[k] = s
            else:
                rem.pop(k, None)
    return IntPoly2(quo)


def _poly_gcd(f: IntPoly2, g: IntPoly2) -> IntPoly2:
    """GCD in Z[q, t]; inputs must have q-valuation >= 0."""
    import sympy

    qs, ts = sympy.symbols("q t")
    F = sympy.Poly.from_dict(dict(f.terms), qs, ts, domain=sympy.ZZ)
    G = sympy.Poly.from_dict(dict(g.terms), qs, ts, domain=sympy.ZZ)
    H = F.gcd(G)
    return IntPoly2({(int(a), int(b)): int(c) for (a, b), c in H.as_dict().items()})


# -- rational functions ------------------------------------------------------

@dataclass(frozen=True)
class RatFuncQT:
    """Reduced quotient of IntPoly2 values, with detected (1 - q^a t^b) factors.

    ``factored_den`` is a tuple of (a, b, multiplicity) such that the product
    of the factors times a monomial unit equals ``den``; None when the
    denominator is not of that shape.
    """

    num: IntPoly2
    den: IntPoly2
    factored_den: tuple[tuple[int, int, int], ...] | None

    def __eq__(self, other):
        if not isinstance(other, RatFuncQT):
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self):
        return hash((self.num, self.den))

    def __mul__(self, other):
        if isinstance(other, RatFuncQT):
            return ratfunc_normalize(self.num * other.num, self.den * other.den)
        return ratfunc_normalize(self.num * other, self.den)

    def __truediv__(self, other):
        if other.num.is_zero():
            raise ZeroDenominator("division by zero rational function")
        return ratfunc_normalize(self.num * other.den, self.den * other.num)

    def __add__(self, other):
        return ratfunc_normalize(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other):
        return ratfunc_normalize(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def shift_t_to_qt(self) -> "RatFuncQT":
        return ratfunc_normalize(self.num.shift_t_to_qt(), self.den.shift_t_to_qt())

    def is_one(self) -> bool:
        return self.num == self.den

    def render(self) -> str:
        if self.den == ONE:
            return self.num.render()
        return f"({self.num.render()}) / ({self.den.render()})"

    def __repr__(self):
        return f"RatFuncQT({self.render()})"


def rat_const(c: int) -> RatFuncQT:
    return ratfunc_normalize(IntPoly2.const(c), ONE)


def rat_poly(p: IntPoly2) -> RatFuncQT:
    return ratfunc_normalize(p, ONE)


def _detect_factored(den: IntPoly2) -> tuple[tuple[int, int, int], ...] | None:
    """Recognise den = (monomial unit) * prod (1 - q^a t^b); DFS with backtracking."""
    t0 = den.t_slice(0)
    if len(t0) != 1:
        return None
    (unit_a,) = t0.keys()
    unit_c = t0[unit_a]
    if abs(unit_c) != 1:
        # a residual integer content in the unit cannot be part of this shape
        if not all(c % unit_c == 0 for c in den.terms.values()):
            return None
    rest = den.q_shift(-unit_a) * unit_c if abs(unit_c) == 1 else None
    if rest is None:
        return None
    # now rest has constant term exactly 1

    def peel(poly: IntPoly2) -> list[tuple[int, int]] | None:
        if poly == ONE:
            return []
        bs = [b for _, b in poly.terms if b > 0]
        if not bs:
            return None
        bmin = min(bs)
        block = poly.t_slice(bmin)
        cands = sorted(a for a, c in block.items() if c < 0)
        for a in cands:
            quo = try_divide(poly, one_minus(a, bmin))
            if quo is not None:
                tail = peel(quo)
                if tail is not None:
                    return [(a, bmin)] + tail
        return None

    factors = peel(rest)
    if factors is None:
        return None
    counted: dict[tuple[int, int], int] = {}
    for ab in factors:
        counted[ab] = counted.get(ab, 0) + 1
    return tuple(sorted((a, b, m) for (a, b), m in counted.items()))


def ratfunc_normalize(num: IntPoly2, den: IntPoly2) -> RatFuncQT:
    """Reduce num/den by polynomial gcd and canonicalise signs and q-units."""
    if den.is_zero():
        raise ZeroDenominator("zero denominator")
    if num.is_zero():
        return RatFuncQT(IntPoly2.zero(), ONE, ())
    vn, vd = num.q_valuation(), den.q_valuation()
    n0, d0 = num.q_shift(-vn), den.q_shift(-vd)
    g = _poly_gcd(n0, d0)
    if g != ONE:
        n0 = try_divide(n0, g)
        d0 = try_divide(d0, g)
        assert n0 is not None and d0 is not None
    cg = _gcd(n0.content(), d0.content())
    if cg > 1:
        n0 = IntPoly2({k: c // cg for k, c in n0.terms.items()})
        d0 = IntPoly2({k: c // cg for k, c in d0.terms.items()})
    if n0.lead_sign() < 0:
        n0, d0 = -n0, -d0
    # fold the net q-unit into the numerator (Laurent, so always legal)
    n0 = n0.q_shift(vn - vd)
    shift = min(n0.q_valuation(), d0.q_valuation())
    n0, d0 = n0.q_shift(-shift), d0.q_shift(-shift)
    return RatFuncQT(n0, d0, _detect_factored(d0))


# -- series expansion ---------------------------------------------------------

@dataclass(frozen=True)
class SeriesTrunc:
    """Truncated t-power series; coefficient k is a Laurent polynomial in q."""

    coeffs: tuple[tuple[tuple[int, int], ...], ...]  # per k: sorted ((a, c), ...)
    order: int

    def coeff(self, k: int) -> dict[int, int]:
        return dict(self.coeffs[k])

    def coeff_poly(self, k: int) -> IntPoly2:
        return IntPoly2({(a, 0): c for a, c in self.coeffs[k]})

    def render(self) -> str:
        rows = []
        for k in range(self.order + 1):
            rows.append(f"t^{k}: {self.coeff_poly(k).render()}")
        return "\n".join(rows)


def series_expand(f: RatFuncQT, order: int) -> SeriesTrunc:
    """Exact coefficients of f as a power series in t, up to t^order."""
    if order < 0:
        raise InvalidParams("order must be >= 0")
    d0 = f.den.t_slice(0)
    if len(d0) != 1 or abs(next(iter(d0.values()))) != 1:
        raise NotExpandable("denominator unit term is not a single +-q power")
    (u_a,) = d0.keys()
    u_c = d0[u_a]
    den_sl = [f.den.t_slice(b) for b in range(order + 1)]
    num_sl = [f.num.t_slice(b) for b in range(order + 1)]
    coeffs: list[dict[int, int]] = []
    for k in range(order + 1):
        acc = dict(num_sl[k])
        for j in range(1, k + 1):
            dj = den_sl[j]
            if not dj:
                continue
            sk = coeffs[k - j]
            for a1, c1 in dj.items():
                for a2, c2 in sk.items():
                    key = a1 + a2
                    s = acc.get(key, 0) - c1 * c2
                    if s:
                        acc[key] = s
                    else:
                        acc.pop(key, None)
        # divide by the unit u_c * q^u_a
        coeffs.append({a - u_a: c * u_c for a, c in acc.items()})
    return SeriesTrunc(
        tuple(tuple(sorted(d.items())) for d in coeffs),
        order,
    )


# -- specialisation -----------------------------------------------------------

def is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, n + 1):
        if p * p > n:
            return True  # n itself is prime
        if n % p == 0:
            while n % p == 0:
                n //= p
            return n == 1
    return True


def specialize(f, q_value: int, t_value: Fraction | None = None):
    """Evaluate at q = q_value (prime power) and optionally t = t_value.

    RatFuncQT with t_value -> exact Fraction; without -> RatFuncQT in t only.
    SeriesTrunc -> list of exact coefficient values.
    """
    if not isinstance(q_value, int) or q_value < 2 or not is_prime_power(q_value):
        raise InvalidParams(f"q must be a prime power >= 2, got {q_value}")
    qv = Fraction(q_value)
    if isinstance(f, SeriesTrunc):
        out = []
        for k in range(f.order + 1):
            v = sum((c * qv**a for a, c in f.coeffs[k]), Fraction(0))
            out.append(int(v) if v.denominator == 1 else v)
        return out
    if t_value is not None:
        dv = f.den.eval(qv, Fraction(t_value))
        if dv == 0:
            raise PoleAtPoint(f"denominator vanishes at q={q_value}, t={t_value}")
        return f.num.eval(qv, Fraction(t_value)) / dv
    return _collapse_q(f, qv)


def _collapse_q(f: RatFuncQT, qv: Fraction) -> RatFuncQT:
    def clear(sl: dict[int, Fraction]) -> tuple[dict[Key, int], int]:
        denlcm = 1
        for v in sl.values():
            denlcm = denlcm * v.denominator // _gcd(denlcm, v.denominator)
        return {(0, b): int(v * denlcm) for b, v in sl.items()}, denlcm

    nsl = {b: v for b, v in _eval_q_slices(f.num, qv).items()}
    dsl = {b: v for b, v in _eval_q_slices(f.den, qv).items()}
    if not dsl:
        raise ZeroDenominator("denominator vanishes identically at this q")
    nt, nl = clear(nsl)
    dt, dl = clear(dsl)
    # num/den = (nt/nl) / (dt/dl): scale both sides integrally
    return ratfunc_normalize(IntPoly2(nt) * dl, IntPoly2(dt) * nl)


def _eval_q_slices(p: IntPoly2, qv: Fraction) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for (a, b), c in p.terms.items():
        out[b] = out.get(b, Fraction(0)) + c * qv**a
    return {b: v for b, v in out.items() if v}


def reduced_zeta(f: RatFuncQT) -> RatFuncQT:
    """Substitute q = 1 (the reduced zeta specialisation)."""
    d1 = f.den.subs_q_one()
    if d1.is_zero():
        raise DegenerateAtQ1("denominator vanishes at q = 1")
    return ratfunc_normalize(f.num.subs_q_one(), d1)


# -- abscissa of convergence --------------------------------------------------

@dataclass(frozen=True)
class AbscissaReport:
    alpha: Fraction
    witness_factor: tuple[int, int]
    cancelled_factors: tuple[tuple[int, int, int], ...]


def abscissa(f: RatFuncQT) -> AbscissaReport:
    """Largest a/b over uncancelled denominator factors (1 - q^a t^b)."""
    if f.factored_den is None:
        raise NoFactoredForm("denominator has no recognised factored form")
    cancelled: list[tuple[int, int, int]] = []
    candidates: list[tuple[Fraction, tuple[int, int]]] = []
    for a, b, mult in f.factored_den:
        fac = one_minus(a, b)
        lost = 0
        rem = f.num
        while lost < mult:
            quo = try_divide(rem, fac)
            if quo is None:
                break
            rem = quo
            lost += 1
        if lost:
            cancelled.append((a, b, lost))
        if lost < mult:
            candidates.append((Fraction(a, b), (a, b)))
    if not candidates:
        raise NoFactoredForm("every denominator factor is cancelled by the numerator")
    alpha = max(c[0] for c in candidates)
    witness = min(ab for val, ab in candidates if val == alpha)
    return AbscissaReport(alpha, witness, tuple(sorted(cancelled)))
