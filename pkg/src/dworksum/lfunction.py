"""Brute-force character sums, L-series assembly and rational recognition.

Two independent evaluations of the twisted sums S_m:

* character route: sum over the torus of Teichmueller-power multiplicative
  characters times theta(1)^(absolute trace) -- no series involved;
* series route: evaluate the truncated level-m twisted series at Teichmueller
  points of the torus.

Both are computed in the level-m coefficient ring and restricted back to the
base ring, which doubles as a Galois-invariance check.  L-series come either
from exp(sum S_m T^m / m) -- with the valuation of every division recorded as
a per-coefficient precision loss -- or, exactly, from the binomial product of
characteristic series of the operator.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import comb

import numpy as np

from . import dwork, finitefield as ff, padic
from .errors import BudgetExceeded, LevelTooLarge, NonUnitConstantTerm
from .padic import RamifiedElement, RingParams


# ----------------------------------------------------------------------
# oracles
# ----------------------------------------------------------------------

def _theta_powers(params: RingParams) -> list[RamifiedElement]:
    th = padic.ring_embed(
        padic.theta_one(padic.ring_create(params.p, 1, params.M)), params
    )
    out = [params.one()]
    for _ in range(params.p - 1):
        out.append(out[-1] * th)
    return out


def _torus_points(field: ff.FqParams, n: int):
    """Torus points as tuples of discrete logs relative to the distinguished
    generator, together with the generator's Teichmueller powers."""
    import itertools

    L = field.q - 1
    return list(itertools.product(range(L), repeat=n))


def _chunked_sum(params, items, term_fn, workers: int = 1):
    """Exact sum of term_fn over items; modular addition is associative and
    commutative, so any chunking gives identical results."""
    if workers <= 1 or len(items) < 64:
        total = params.zero()
        for it in items:
            total = total + term_fn(it)
        return total
    chunks = [items[i::workers] for i in range(workers)]

    def partial(chunk):
        acc = params.zero()
        for it in chunk:
            acc = acc + term_fn(it)
        return acc

    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(partial, chunks))
    total = params.zero()
    for x in parts:
        total = total + x
    return total


def sums_oracle_characters(
    config,
    a_residues,
    twist: dwork.TwistData,
    m: int,
    M: int,
    workers: int = 1,
    level_budget: int = 6,
) -> tuple[RamifiedElement, Fraction]:
    """S_m as the literal character sum over (F_{q^m}^*)^n.

    a_residues: the coefficients as elements of F_q.  The value is returned in
    the base ring R(p, f, M); runtime is (q^m - 1)^n ring operations.
    """
    if m > level_budget:
        raise LevelTooLarge(f"level {m} exceeds the budget {level_budget}")
    base_field = a_residues[0].params
    p, f = base_field.p, base_field.degree
    q = twist.q
    assert q == p**f
    big_field = ff.FqParams(p, f * m)
    big_ring = padic.ring_create(p, f * m, M)
    base_ring = padic.ring_create(p, f, M)

    gen = ff.multiplicative_generator(big_field)
    L = big_field.q - 1
    # Teichmueller powers of the generator: teich(g)^k = teich(g^k)
    teich_pow = [big_ring.one()]
    tg = padic.teichmueller(gen, big_ring)
    for _ in range(L - 1):
        teich_pow.append(teich_pow[-1] * tg)
    gen_pows = [big_field.one()]
    for _ in range(L - 1):
        gen_pows.append(gen_pows[-1] * gen)
    theta_pow = _theta_powers(big_ring)

    a_big = [ff.embed(a, big_field) for a in a_residues]
    tw_exp = twist.shift(m)  # gamma_i (1 - q^m), integers
    n, N = config.n, config.N

    def term(logs):
        us = [gen_pows[e] for e in logs]
        tw_log = sum(tw_exp[i] * logs[i] for i in range(n)) % L
        val = big_field.zero()
        for j in range(N):
            if a_big[j].is_zero():
                continue
            mono_log = sum(config.A[i][j] * logs[i] for i in range(n)) % L
            val = val + a_big[j] * gen_pows[mono_log]
        c = ff.absolute_trace_int(val)
        return teich_pow[tw_log] * theta_pow[c]

    total = _chunked_sum(big_ring, _torus_points(big_field, n), term, workers)
    return padic.ring_restrict(total, base_ring), Fraction(M)


def sums_oracle_series(
    config,
    a_residues,
    twist: dwork.TwistData,
    m: int,
    M: int,
    nd,
    series: dwork.SeriesOnCone | None = None,
    workers: int = 1,
) -> tuple[RamifiedElement, Fraction]:
    """S_m by evaluating the truncated level-m twisted series at the
    Teichmueller points of the torus; agrees with the character oracle to
    certified precision (that agreement is the theta-identity under test)."""
    base_field = a_residues[0].params
    p, f = base_field.p, base_field.degree
    base_ring = padic.ring_create(p, f, M)
    if series is None:
        a_lifts = [padic.teichmueller(a, base_ring) for a in a_residues]
        series = dwork.h_series(a_lifts, twist, m, nd)
    big_field = ff.FqParams(p, f * m)
    big_ring = padic.ring_create(p, f * m, M)

    gen = ff.multiplicative_generator(big_field)
    L = big_field.q - 1
    teich_pow = [big_ring.one()]
    tg = padic.teichmueller(gen, big_ring)
    for _ in range(L - 1):
        teich_pow.append(teich_pow[-1] * tg)

    support = list(series.support())
    exps = np.array(support, dtype=np.int64) if support else np.zeros((0, config.n), dtype=np.int64)
    coeff_arr = np.array(
        [series.coeffs[e].coords for e in support], dtype=np.int64
    ) if support else np.zeros((0, base_ring.blow), dtype=np.int64)
    pM = base_ring.pM
    blow = base_ring.blow

    def term(logs):
        # class of t^w at the point u = g^logs is g^(sum w_i logs_i)
        classes = (exps @ np.array(logs, dtype=np.int64)) % L
        acc = np.zeros((L, blow), dtype=np.int64)
        np.add.at(acc, classes, coeff_arr)
        acc %= pM
        total = big_ring.zero()
        for c in range(L):
            row = acc[c]
            if not row.any():
                continue
            small = base_ring.from_coords(row.tolist())
            total = total + padic.ring_embed(small, big_ring) * teich_pow[c]
        return total

    total = _chunked_sum(big_ring, _torus_points(big_field, config.n), term, workers)
    return padic.ring_restrict(total, base_ring), Fraction(M)


def hyp_table(
    config,
    twist: dwork.TwistData,
    field: ff.FqParams,
    M: int,
    budget: int = 4096,
    workers: int = 1,
) -> dict:
    """The twisted sum at every rational coefficient point x in F_q^N."""
    import itertools

    if field.q**config.N > budget:
        raise BudgetExceeded(
            f"q^N = {field.q ** config.N} exceeds the table budget {budget}"
        )
    out = {}
    for x in itertools.product(field.all_elements(), repeat=config.N):
        value, _ = sums_oracle_characters(config, list(x), twist, 1, M, workers)
        out[tuple(e.coeffs for e in x)] = value
    return out


# ----------------------------------------------------------------------
# power series in T over the ring
# ----------------------------------------------------------------------

class PowerSeriesT:
    """Truncated series with a per-coefficient certified precision (the
    number of known p-adic digits, as an exact rational)."""

    def __init__(self, params: RingParams, coeffs, precs):
        self.params = params
        self.coeffs = list(coeffs)
        self.precs = [Fraction(x) for x in precs]

    def order(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self):
        return f"PowerSeriesT({self.coeffs!r})"


def divide_by_int(x: RamifiedElement, k: int) -> tuple[RamifiedElement, int]:
    """x / k with the p-part of k stripped digit-by-digit; returns the
    quotient and the number of precision digits lost (= ord_p(k))."""
    params = x.params
    p, pM = params.p, params.pM
    e = 0
    kk = k
    while kk % p == 0:
        kk //= p
        e += 1
    y = x * pow(kk, -1, pM)
    if e == 0:
        return y, 0
    pe = p**e
    coords = []
    for c in y.coords:
        if c % pe:
            raise ArithmeticError(
                "division by p^e hit a non-divisible coordinate; the dividend "
                "was not the integral series coefficient it should be"
            )
        coords.append(c // pe)
    return params.from_coords(coords), e


def l_series_from_sums(sums, m_max: int) -> PowerSeriesT:
    """exp(sum_m S_m T^m / m) truncated at T^m_max via k L_k = sum S_m L_{k-m}.

    sums: list of (S_m, precision) for m = 1..m_max.  Each division by k
    divisible by p costs ord_p(k) digits, recorded per coefficient.
    """
    if m_max < 1 or len(sums) < m_max:
        raise ValueError("need S_m for every m <= m_max")
    params = sums[0][0].params
    coeffs = [params.one()]
    precs = [Fraction(params.M)]
    for k in range(1, m_max + 1):
        acc = params.zero()
        prec = Fraction(params.M)
        for m in range(1, k + 1):
            S, sp = sums[m - 1]
            acc = acc + S * coeffs[k - m]
            prec = min(prec, sp, precs[k - m])
        val, lost = divide_by_int(acc, k)
        coeffs.append(val)
        precs.append(prec - lost)
    return PowerSeriesT(params, coeffs, precs)


def _mul_trunc(params, a, b, order):
    out = [params.zero() for _ in range(order + 1)]
    for i, x in enumerate(a):
        if i > order or x.is_zero():
            continue
        for j, y in enumerate(b):
            if i + j > order:
                break
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


def _inv_trunc(params, a, order):
    if a[0] != params.one():
        raise NonUnitConstantTerm("series inversion needs constant term 1")
    out = [params.one()] + [params.zero()] * order
    for k in range(1, order + 1):
        acc = params.zero()
        for j in range(1, min(k, len(a) - 1) + 1):
            if not a[j].is_zero():
                acc = acc + a[j] * out[k - j]
        out[k] = -acc
    return out


def l_from_charseries(
    P,
    P_prec,
    n: int,
    q: int,
    m_max: int,
) -> PowerSeriesT:
    """L from the operator side: prod_k P(q^(n-k) T)^((-1)^(k+1) binom(n,k))
    truncated at T^m_max.  Exact in the ring: inversion and products only."""
    params = P[0].params
    if P[0] != params.one():
        raise NonUnitConstantTerm("characteristic series must start at 1")
    num = [params.one()]
    den = [params.one()]
    for k in range(n + 1):
        s = q ** (n - k)
        scaled = []
        for i, c in enumerate(P):
            if i > m_max:
                break
            scaled.append(c * pow(s, i, params.pM))
        # exponent (-1)^(k+1) binom(n, k): odd k contributes to the numerator
        for _ in range(comb(n, k)):
            if k % 2 == 1:
                num = _mul_trunc(params, num, scaled, m_max)
            else:
                den = _mul_trunc(params, den, scaled, m_max)
    result = _mul_trunc(params, num, _inv_trunc(params, den, m_max), m_max)
    prec = min(Fraction(P_prec), Fraction(params.M))
    return PowerSeriesT(params, result, [prec] * (m_max + 1))


# ----------------------------------------------------------------------
# rational recognition and Newton polygons
# ----------------------------------------------------------------------

class LPolynomial:
    """Recognized polynomial; sign is the exponent (-1)^(n-1) relating the
    L-series to this polynomial."""

    def __init__(self, params, coeffs, precs, sign: int):
        self.params = params
        self.coeffs = list(coeffs)
        self.precs = list(precs)
        self.sign = sign

    def degree(self) -> int:
        return len(self.coeffs) - 1


class NotPolynomial:
    def __init__(self, index: int, coeff, prec):
        self.index = index
        self.coeff = coeff
        self.prec = prec

    def __repr__(self):
        return f"NotPolynomial(first offending T^{self.index})"


def rational_recognition(series: PowerSeriesT, expected_degree: int, n: int):
    """Raise the series to (-1)^(n-1) and accept iff every coefficient beyond
    expected_degree vanishes at its certified precision."""
    if series.order() < expected_degree + 3:
        raise ValueError(
            f"series known to order {series.order()}, need {expected_degree + 3}"
        )
    params = series.params
    sign = 1 if n % 2 == 1 else -1
    if sign == 1:
        coeffs = list(series.coeffs)
        precs = list(series.precs)
    else:
        coeffs = _inv_trunc(params, series.coeffs, series.order())
        worst = min(series.precs)
        precs = [worst] * len(coeffs)
    for k in range(expected_degree + 1, len(coeffs)):
        ord_k = padic.pi_ord(coeffs[k])
        if not ord_k.known_at_least(precs[k]):
            return NotPolynomial(k, coeffs[k], precs[k])
    return LPolynomial(
        params, coeffs[: expected_degree + 1], precs[: expected_degree + 1], sign
    )


class NewtonPolygon:
    """Lower convex hull of (i, ord c_i); slopes listed with multiplicity.

    flagged lists interior indices whose coefficient is indistinguishable
    from zero at working precision (they cannot pull the hull down below the
    precision ceiling, and are reported rather than silently trusted)."""

    def __init__(self, vertices, slopes, flagged):
        self.vertices = vertices  # [(i, Fraction ord)]
        self.slopes = slopes  # [(Fraction slope, int multiplicity)]
        self.flagged = flagged

    def slope_list(self):
        out = []
        for s, mult in self.slopes:
            out.extend([s] * mult)
        return out


def newton_polygon(poly: LPolynomial) -> NewtonPolygon:
    params = poly.params
    pts = []
    flagged = []
    for i, c in enumerate(poly.coeffs):
        o = padic.pi_ord(c)
        if o.at_least_precision:
            if 0 < i < poly.degree():
                flagged.append(i)
            elif i == poly.degree():
                flagged.append(i)
            continue
        pts.append((i, o.value))
    if not pts or pts[0][0] != 0:
        raise ValueError("constant term must be a unit (ord 0)")
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1, x2 - x1)
        if slopes and slopes[-1][0] == s:
            slopes[-1] = (s, slopes[-1][1] + (x2 - x1))
        else:
            slopes.append((s, x2 - x1))
    return NewtonPolygon(hull, slopes, flagged)
