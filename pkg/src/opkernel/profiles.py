"""Scalar radial profiles, their squared-distance jets, and monotonicity checks.

Three radial families and the plane wave:

  gaussian      p_w(x, y) = exp(-w ||x-y||^2)          (w scales squared distance)
  askey(l)      p_w(x, y) = (1 - w ||x-y||)_+^(l-1)    (w scales distance)
  omega(m)      p_w(x, y) = Omega_m(w ||x-y||)         (w scales distance)
  plane wave    p_xi(x, y) = exp(-i (x-y) . xi)

Omega_m(t) is the mean of plane waves over the unit sphere S^{m-1}: the
radial function whose value at t is the average of exp(-i t u.e) over unit
vectors u.  As a power series,

  Omega_m(t) = sum_k c_k(m) (-t^2/4)^k,  c_0 = 1,
  term_{k+1}/term_k = (-t^2/4) / ((k+1)(k + m/2)),

so Omega_1 = cos and Omega_3(t) = sin(t)/t.  The series alternates with
huge intermediate terms (about 8e11 at t=30), so it is summed in exact
rational arithmetic and rounded once at the end; float accumulation would
lose five or six digits to cancellation there.

Derivative machinery uses squared-distance jets: write a radial atom as
f(d) = g(s) with s = ||d||^2.  Differentiating multiplies in polynomial
factors via the chain rule

  d/d d_i [ q(d) g^(k)(s) ] = (dq/d d_i) g^(k)(s) + 2 d_i q(d) g^(k+1)(s),

so any mixed partial of f is a finite sum  sum_k poly_k(d) g^(k)(s)  -- a
RadialJet.  The jets are family-independent; families plug in their own
g^(k) values (gaussian and omega are smooth at 0; askey is not, so it has
no jets here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    InvalidGrid,
    InvalidMeasure,
    InvalidParameter,
    UnsupportedJet,
)

# Omega series controls: stop when |term| < 1e-17 * running magnitude of the
# partial sum (floored at 1), hard cap on the number of terms.
OMEGA_TERM_RTOL = Fraction(1, 10**17)
OMEGA_MAX_TERMS = 500

# Jets are capped at total derivative order 8.
JET_ORDER_CAP = 8

MultiIndex = tuple[int, ...]


# ----------------------------------------------------------------------
# multi-indices
# ----------------------------------------------------------------------


def multi_index_order(alpha: MultiIndex) -> int:
    return int(sum(alpha))


def validate_multi_index(alpha, m: int) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != m:
        raise InvalidParameter(f"multi-index {alpha} has length {len(alpha)}, expected {m}")
    if any(a < 0 for a in alpha):
        raise InvalidParameter(f"multi-index {alpha} has a negative component")
    return alpha


def multi_indices_up_to(m: int, q: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length m with |alpha| <= q, graded lexicographic.

    Sorted by total order first, then componentwise lexicographically, e.g.
    m=2, q=2: (0,0), (0,1), (1,0), (0,2), (1,1), (2,0).
    """
    if m < 1 or q < 0:
        raise InvalidParameter("need m >= 1 and q >= 0")

    def gen(length, total):
        if length == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in gen(length - 1, total - head):
                yield (head,) + rest

    out = []
    for total in range(q + 1):
        out.extend(sorted(gen(m, total)))
    return tuple(out)


# ----------------------------------------------------------------------
# profile families
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """One of the radial families; parameters validated on construction.

    kind            "gaussian" | "askey" | "omega"
    ell_smoothness  askey exponent parameter l >= 2 (profile is (1-wt)_+^(l-1))
    m_source        omega source dimension m >= 1 (sphere S^{m-1})
    """

    kind: str
    ell_smoothness: int | None = None
    m_source: int | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.ell_smoothness is not None or self.m_source is not None:
                raise InvalidParameter("gaussian takes no parameters")
        elif self.kind == "askey":
            if self.ell_smoothness is None or self.ell_smoothness < 2:
                raise InvalidParameter("askey needs integer ell_smoothness >= 2")
            if self.m_source is not None:
                raise InvalidParameter("askey takes no m_source")
        elif self.kind == "omega":
            if self.m_source is None or self.m_source < 1:
                raise InvalidParameter("omega needs integer m_source >= 1")
            if self.ell_smoothness is not None:
                raise InvalidParameter("omega takes no ell_smoothness")
        else:
            raise InvalidParameter(f"unknown radial family kind {self.kind!r}")

    @staticmethod
    def gaussian() -> "RadialProfile":
        return RadialProfile("gaussian")

    @staticmethod
    def askey(ell_smoothness: int) -> "RadialProfile":
        return RadialProfile("askey", ell_smoothness=int(ell_smoothness))

    @staticmethod
    def omega(m_source: int) -> "RadialProfile":
        return RadialProfile("omega", m_source=int(m_source))


@dataclass(frozen=True)
class PlaneWaveParam:
    """Frequency vector xi of a plane wave exp(-i (x-y).xi)."""

    xi: tuple[float, ...]

    def __post_init__(self):
        if len(self.xi) < 1 or not all(math.isfinite(v) for v in self.xi):
            raise InvalidParameter("plane-wave frequency must be a finite nonempty vector")


def _check_scale(omega: float) -> float:
    omega = float(omega)
    if not math.isfinite(omega) or omega < 0.0:
        raise InvalidParameter(f"scale parameter must be finite and >= 0, got {omega}")
    return omega


def _check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise InvalidParameter(f"radial argument must be finite and >= 0, got {t}")
    return t


def omega_eval(m: int, t: float) -> float:
    """Omega_m(t): spherical plane-wave mean, by its even power series.

    Summed with exact Fraction arithmetic (see module docstring); truncation
    when |term| < 1e-17 * max(|partial sum|, 1), hard cap 500 terms.
    """
    m = int(m)
    if m < 1:
        raise InvalidParameter("omega_eval needs m >= 1")
    t = float(t)
    if not math.isfinite(t):
        raise InvalidParameter("omega_eval needs finite t")
    x = Fraction(t) * Fraction(t) / 4  # exact t^2/4
    term = Fraction(1)
    total = Fraction(1)
    for k in range(OMEGA_MAX_TERMS):
        term *= -x / ((k + 1) * (k + Fraction(m, 2)))
        total += term
        if abs(term) < OMEGA_TERM_RTOL * max(abs(total), Fraction(1)):
            break
    return float(total)


def profile_value(profile: RadialProfile, omega: float, t: float) -> float:
    """Scalar profile value p_omega at radial distance t >= 0."""
    omega = _check_scale(omega)
    t = _check_t(t)
    if profile.kind == "gaussian":
        return math.exp(-omega * t * t)
    if profile.kind == "askey":
        return max(0.0, 1.0 - omega * t) ** (profile.ell_smoothness - 1)
    if profile.kind == "omega":
        return omega_eval(profile.m_source, omega * t)
    raise InvalidParameter(f"unknown family {profile.kind!r}")


def _pochhammer(a: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out *= a + i
    return out


def sjet_derivatives(profile: RadialProfile, omega: float, s: float, kmax: int) -> np.ndarray:
    """Derivatives g^(0..kmax)(s) of the squared-distance form g(s) = p_omega
    at squared distance s, where p_omega(x,y) = g(||x-y||^2).

    gaussian: g(s) = exp(-omega s), so g^(k)(s) = (-omega)^k exp(-omega s).
    omega(m): g(s) = sum_k c_k (-omega^2 s / 4)^k, differentiated termwise
              and summed exactly like omega_eval.
    askey:    no jets (kink at the support edge and at 0) -> UnsupportedJet.
    """
    omega = _check_scale(omega)
    s = float(s)
    if not math.isfinite(s) or s < 0.0:
        raise InvalidParameter(f"squared distance must be finite and >= 0, got {s}")
    kmax = int(kmax)
    if kmax < 0 or kmax > JET_ORDER_CAP:
        raise InvalidParameter(f"kmax must be in [0, {JET_ORDER_CAP}]")

    if profile.kind == "gaussian":
        e = math.exp(-omega * s)
        return np.array([(-omega) ** k * e for k in range(kmax + 1)], dtype=float)

    if profile.kind == "omega":
        msrc = profile.m_source
        q = Fraction(omega) * Fraction(omega) / 4
        sf = Fraction(s)
        out = np.empty(kmax + 1, dtype=float)
        for j in range(kmax + 1):
            # k = j term: (-q)^j j! / (j! (m/2)_j) = (-q)^j / (m/2)_j
            term = (-q) ** j / _pochhammer(Fraction(msrc, 2), j)
            total = term
            k = j
            for _ in range(OMEGA_MAX_TERMS):
                # ratio of consecutive termwise-differentiated terms
                term *= -q * sf / ((k + Fraction(msrc, 2)) * (k + 1 - j))
                total += term
                k += 1
                if abs(term) < OMEGA_TERM_RTOL * max(abs(total), Fraction(1)):
                    break
            out[j] = float(total)
        return out

    if profile.kind == "askey":
        raise UnsupportedJet(
            "askey profiles have no squared-distance jets (kinks at t=0 and the "
            "support edge); use the finite-difference fallback away from kinks"
        )
    raise InvalidParameter(f"unknown family {profile.kind!r}")


# ----------------------------------------------------------------------
# radial jets: mixed partials of f(d) = g(||d||^2)
# ----------------------------------------------------------------------

# A polynomial in d_1..d_m: {exponent tuple -> coefficient}.
_Poly = dict[MultiIndex, float]


@dataclass(frozen=True)
class RadialJet:
    """A mixed partial of a radial function in jet form:

        (partial^gamma f)(d) = sum_k poly_k(d) * g^(k)(||d||^2)

    terms maps k -> polynomial. The order-0 jet is {0: 1}; after |gamma|
    differentiations the maximal k is at most |gamma|.
    """

    m: int
    terms: tuple[tuple[int, tuple[tuple[MultiIndex, float], ...]], ...]

    def as_dict(self) -> dict[int, _Poly]:
        return {k: dict(poly) for k, poly in self.terms}

    @property
    def max_k(self) -> int:
        return max((k for k, _ in self.terms), default=0)


def _freeze_jet(m: int, terms: dict[int, _Poly]) -> RadialJet:
    frozen = tuple(
        (k, tuple(sorted(poly.items())))
        for k, poly in sorted(terms.items())
        if poly
    )
    return RadialJet(m=m, terms=frozen)


def jet_order_zero(m: int) -> RadialJet:
    if m < 1:
        raise InvalidParameter("need m >= 1")
    return _freeze_jet(m, {0: {(0,) * m: 1.0}})


def jet_differentiate(jet: RadialJet, i: int) -> RadialJet:
    """Differentiate a jet with respect to coordinate i (1-based)."""
    if not (1 <= i <= jet.m):
        raise InvalidParameter(f"coordinate index {i} out of range 1..{jet.m}")
    idx = i - 1
    new: dict[int, _Poly] = {}

    def add(k: int, exps: MultiIndex, coeff: float):
        if coeff == 0.0:
            return
        poly = new.setdefault(k, {})
        poly[exps] = poly.get(exps, 0.0) + coeff
        if poly[exps] == 0.0:
            del poly[exps]

    for k, poly in jet.terms:
        for exps, coeff in poly:
            if exps[idx] > 0:  # product rule on the polynomial factor
                lowered = exps[:idx] + (exps[idx] - 1,) + exps[idx + 1 :]
                add(k, lowered, coeff * exps[idx])
            # chain rule: * 2 d_i, bumps the g-derivative order
            raised = exps[:idx] + (exps[idx] + 1,) + exps[idx + 1 :]
            add(k + 1, raised, 2.0 * coeff)
    return _freeze_jet(jet.m, new)


_JET_CACHE: dict[tuple[int, MultiIndex], RadialJet] = {}


def jet_for_multi_index(m: int, gamma: MultiIndex) -> RadialJet:
    """The jet of partial^gamma applied to a radial f, cached by (m, gamma)."""
    gamma = validate_multi_index(gamma, m)
    if multi_index_order(gamma) > JET_ORDER_CAP:
        raise UnsupportedJet(f"derivative order {multi_index_order(gamma)} exceeds cap {JET_ORDER_CAP}")
    key = (m, gamma)
    cached = _JET_CACHE.get(key)
    if cached is not None:
        return cached
    jet = jet_order_zero(m)
    for coord, reps in enumerate(gamma, start=1):
        for _ in range(reps):
            jet = jet_differentiate(jet, coord)
    _JET_CACHE[key] = jet
    return jet


def jet_eval(jet: RadialJet, d: np.ndarray, gvals: np.ndarray) -> float:
    """Evaluate sum_k poly_k(d) gvals[k] at displacement d."""
    total = 0.0
    for k, poly in jet.terms:
        acc = 0.0
        for exps, coeff in poly:
            mono = coeff
            for di, e in zip(d, exps):
                if e:
                    mono *= float(di) ** e
            acc += mono
        total += acc * float(gvals[k])
    return total


def plane_wave_deriv(
    xi: np.ndarray,
    alpha: MultiIndex,
    beta: MultiIndex,
    x: np.ndarray,
    y: np.ndarray,
) -> complex:
    """Mixed partial of the plane wave:

        d^alpha_x d^beta_y exp(-i (x-y).xi)
          = (-i)^|alpha| (i)^|beta| xi^(alpha+beta) exp(-i (x-y).xi).
    """
    xi = np.asarray(xi, dtype=float)
    m = xi.shape[0]
    alpha = validate_multi_index(alpha, m)
    beta = validate_multi_index(beta, m)
    na, nb = multi_index_order(alpha), multi_index_order(beta)
    coeff = (-1j) ** na * (1j) ** nb
    for xij, a, b in zip(xi, alpha, beta):
        coeff *= xij ** (a + b)
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return complex(coeff * np.exp(-1j * float(d @ xi)))


# ----------------------------------------------------------------------
# complete monotonicity checks
# ----------------------------------------------------------------------

CM_DEFAULT_H = 1e-2


@dataclass(frozen=True)
class CMCheckResult:
    ok: bool
    violation: tuple[int, float] | None  # (difference order n, grid point t)
    tolerance: float


def completely_monotone_check(g, t_grid, nmax: int = 6, h: float = CM_DEFAULT_H) -> CMCheckResult:
    """Sampled complete-monotonicity test via forward differences.

    Checks (-1)^n Delta_h^n g(t) >= -1e-9 |g(t_min)| for n = 0..nmax at every
    grid point. The grid must be strictly increasing and positive with
    t_min > nmax*h so the stencil stays well inside the domain.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1 or not np.all(np.isfinite(t)):
        raise InvalidGrid("grid must be a finite 1-d array")
    if np.any(t <= 0.0) or np.any(np.diff(t) <= 0.0):
        raise InvalidGrid("grid must be strictly increasing and positive")
    if not (isinstance(nmax, int) and nmax >= 0):
        raise InvalidParameter("nmax must be a nonnegative integer")
    h = float(h)
    if not math.isfinite(h) or h <= 0.0:
        raise InvalidParameter("h must be finite and > 0")
    if t[0] <= nmax * h:
        raise InvalidGrid(
            f"t_min = {t[0]} must exceed nmax*h = {nmax * h} for the difference stencil"
        )

    vals = np.empty((t.size, nmax + 1), dtype=float)
    for j in range(nmax + 1):
        vals[:, j] = [float(g(ti + j * h)) for ti in t]
    tol = 1e-9 * abs(vals[0, 0])

    for n in range(nmax + 1):
        coeffs = np.array(
            [(-1) ** (n - j) * math.comb(n, j) for j in range(n + 1)], dtype=float
        )
        fd = vals[:, : n + 1] @ coeffs  # Delta_h^n g(t)
        signed = (-1.0) ** n * fd
        bad = np.nonzero(signed < -tol)[0]
        if bad.size:
            return CMCheckResult(ok=False, violation=(n, float(t[bad[0]])), tolerance=tol)
    return CMCheckResult(ok=True, violation=None, tolerance=tol)


def williamson_construct(atoms, ell: int):
    """f(t) = sum_j lambda_j (1 - r_j t)_+^(ell-1) from atoms (r_j, lambda_j).

    Nonnegative mixtures of truncated-power profiles; a negative weight or
    scale raises InvalidMeasure. Returns a scalar callable.
    """
    if not (isinstance(ell, int) and ell >= 2):
        raise InvalidParameter("ell must be an integer >= 2")
    checked = []
    for r, lam in atoms:
        r, lam = float(r), float(lam)
        if not (math.isfinite(r) and math.isfinite(lam)):
            raise InvalidMeasure("atoms must be finite (r, lambda) pairs")
        if lam < 0.0:
            raise InvalidMeasure(f"negative weight {lam} in truncated-power mixture")
        if r < 0.0:
            raise InvalidMeasure(f"negative scale {r} in truncated-power mixture")
        checked.append((r, lam))
    power = ell - 1

    def f(t: float) -> float:
        return sum(lam * max(0.0, 1.0 - r * t) ** power for r, lam in checked)

    return f


@dataclass(frozen=True)
class EllCMResult:
    ok: bool
    failed_checks: tuple[str, ...]
    tolerance: float
    notes: str


def ell_cm_check(f, ell: int, t_grid, h: float = CM_DEFAULT_H) -> EllCMResult:
    """Sampled multiply-monotone test of order ell.

    Checks, at tolerance 1e-8 * |f(grid min)|:
      * nonnegativity of f on the grid,
      * boundedness of f on the tail of the grid (max over the last quarter
        does not exceed the max over the rest) -- a HEURISTIC stand-in for
        the existence of a finite limit at infinity, which no finite sample
        can certify,
      * convexity of D(t) = (-1)^(ell-2) Delta_h^(ell-2) f(t), via
        nonnegative second forward differences with the same step h.
    """
    if not (isinstance(ell, int) and ell >= 2):
        raise InvalidParameter("ell must be an integer >= 2")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 4 or not np.all(np.isfinite(t)):
        raise InvalidGrid("grid must be a finite 1-d array with at least 4 points")
    if np.any(t <= 0.0) or np.any(np.diff(t) <= 0.0):
        raise InvalidGrid("grid must be strictly increasing and positive")
    h = float(h)
    if not math.isfinite(h) or h <= 0.0:
        raise InvalidParameter("h must be finite and > 0")

    nsten = (ell - 2) + 2  # forward-difference depth: ell-2 for D, +2 for convexity
    vals = np.empty((t.size, nsten + 1), dtype=float)
    for j in range(nsten + 1):
        vals[:, j] = [float(f(ti + j * h)) for ti in t]
    tol = 1e-8 * abs(vals[0, 0])

    failed = []
    if np.any(vals[:, 0] < -tol):
        failed.append("nonnegativity")

    split = max(1, (3 * t.size) // 4)
    head_max = float(np.max(np.abs(vals[:split, 0])))
    tail_max = float(np.max(np.abs(vals[split:, 0])))
    if tail_max > head_max + tol:
        failed.append("tail-boundedness")

    n = ell - 2
    coeffs = np.array([(-1) ** (n - j) * math.comb(n, j) for j in range(n + 1)], dtype=float)
    sign = (-1.0) ** n
    # D at t, t+h, t+2h assembled from the f-value table
    d0 = sign * (vals[:, 0 : n + 1] @ coeffs)
    d1 = sign * (vals[:, 1 : n + 2] @ coeffs)
    d2 = sign * (vals[:, 2 : n + 3] @ coeffs)
    if np.any(d2 - 2.0 * d1 + d0 < -tol):
        failed.append("convexity")

    return EllCMResult(
        ok=not failed,
        failed_checks=tuple(failed),
        tolerance=tol,
        notes=(
            "tail-boundedness is a heuristic proxy for the existence of a finite "
            "limit at infinity; a finite grid cannot certify a limit"
        ),
    )
