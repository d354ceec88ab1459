"""Operator-valued kernels: mixtures of scalar profiles with matrix weights.

A kernel is K(x, y) = sum_j p_j(x, y) G_j where the p_j are one scalar
family (gaussian / askey / omega at scales omega_j, or plane waves at
frequencies xi_j) and the G_j are the PSD matrix weights of the mixing
measure. K maps points of R^m to ell x ell complex matrices and is
Hermitian in the kernel sense, K(y, x) = K(x, y)^H.

Derivative kernels: for translation-invariant K(x, y) = F(x - y),

    d^alpha_x d^beta_y K(x, y) = (-1)^|beta| (d^(alpha+beta) F)(x - y),

and for radial families (d^gamma F) comes from the squared-distance jets in
profiles.py, evaluated atomwise. The askey family is not smooth, so it only
gets a finite-difference fallback that refuses to evaluate near its kinks.

Block Grams: for points x_1..x_n, the block Gram is the n*ell square matrix
of blocks K(x_mu, x_nu); the derivative block Gram at jet order q carries
one block row/column per (point, multi-index) pair with |alpha| <= q in
graded-lexicographic order, block ((mu,alpha),(nu,beta)) being
d^alpha_1 d^beta_2 K(x_mu, x_nu). Both are symmetrized on assembly.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DuplicatePoints,
    InvalidMeasure,
    InvalidPoint,
    NearKink,
    NotRadial,
    UnsupportedJet,
)
from .hermitian import HermitianMatrix, is_psd, trace
from .measures import OperatorMeasure, ScalarMeasure
from .profiles import (
    JET_ORDER_CAP,
    MultiIndex,
    RadialProfile,
    jet_eval,
    jet_for_multi_index,
    multi_index_order,
    multi_indices_up_to,
    profile_value,
    sjet_derivatives,
    validate_multi_index,
)

# Two points closer than this are treated as duplicates in Gram assembly.
DUPLICATE_POINT_TOL = 1e-12
# Finite-difference fallback step factor and kink exclusion radius (in steps).
FD_STEP_FACTOR = 1e-4
FD_KINK_RADIUS = 10.0


class PlaneWaveMeasure:
    """Finite atomic nonnegative operator measure on frequency space R^m.

    Atoms are (xi, G) with xi a frequency vector and G PSD. Duplicate
    frequencies merge by summing matrices; zero matrices are pruned. Atoms
    are stored sorted by frequency tuple for determinism.
    """

    __slots__ = ("dim", "m", "atoms")

    def __init__(self, dim: int, m: int, atoms):
        dim, m = int(dim), int(m)
        if dim < 1 or m < 1:
            raise InvalidMeasure("need dim >= 1 and m >= 1")
        merged: dict[tuple, np.ndarray] = {}
        for xi, g in atoms:
            xi = np.asarray(xi, dtype=float)
            if xi.shape != (m,) or not np.all(np.isfinite(xi)):
                raise InvalidMeasure(f"frequency must be a finite vector of length {m}")
            gh = g if isinstance(g, HermitianMatrix) else HermitianMatrix(g)
            if gh.dim != dim:
                raise InvalidMeasure(f"atom matrix has dim {gh.dim}, expected {dim}")
            check = is_psd(gh)
            if not check.ok:
                raise InvalidMeasure(
                    f"atom at xi={xi.tolist()} is not PSD "
                    f"(min eigenvalue {check.min_eigenvalue:.3e})"
                )
            key = tuple(float(v) for v in xi)
            merged[key] = merged[key] + gh.entries if key in merged else gh.entries
        kept = []
        for key in sorted(merged):
            gh = HermitianMatrix(merged[key])
            if trace(gh) > 0.0:
                kept.append((np.array(key, dtype=float), gh))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "atoms", tuple(kept))

    def __setattr__(self, name, value):
        raise AttributeError("PlaneWaveMeasure is immutable")

    def __len__(self):
        return len(self.atoms)


class OperatorKernel:
    """A radial or plane-wave operator kernel on R^m with values in C^(ell x ell).

    Use radial_kernel() / plane_wave_kernel() to construct. Exposes m, ell,
    eval(x, y) and the vectorized eval_diffs(diffs) that Gram assembly uses.
    """

    __slots__ = ("kind", "profile", "measure", "m", "ell")

    def __init__(self, kind, profile, measure, m):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "ell", measure.dim)

    def __setattr__(self, name, value):
        raise AttributeError("OperatorKernel is immutable")

    @property
    def is_radial(self) -> bool:
        return self.kind == "radial"

    def eval_diffs(self, diffs: np.ndarray) -> np.ndarray:
        """Kernel blocks F(d) for a batch of difference vectors, shape
        (npairs, m) -> (npairs, ell, ell) complex."""
        diffs = np.asarray(diffs, dtype=float)
        npairs = diffs.shape[0]
        # grids repeat differences heavily (a uniform n-point line has only
        # 2n-1 distinct diffs among n^2 pairs); each row's value depends on
        # that row alone, so computing unique rows and scattering back is
        # exact, and it turns the demo-sized Gram assemblies from minutes
        # into milliseconds
        if npairs > 64:
            uniq, inv = np.unique(diffs, axis=0, return_inverse=True)
            if uniq.shape[0] <= npairs // 2:
                return self.eval_diffs(uniq)[inv.reshape(-1)]
        out = np.zeros((npairs, self.ell, self.ell), dtype=complex)
        if not self.measure.atoms:
            return out
        gs = np.stack([g.entries for _, g in self.measure.atoms])
        if self.kind == "plane_wave":
            xis = np.stack([xi for xi, _ in self.measure.atoms])
            phases = np.exp(-1j * diffs @ xis.T)  # (npairs, natoms)
            return np.einsum("pa,aij->pij", phases, gs)
        t = np.sqrt(np.sum(diffs * diffs, axis=1))
        omegas = np.array([omega for omega, _ in self.measure.atoms])
        if self.profile.kind == "gaussian":
            vals = np.exp(-np.outer(t * t, omegas))
        elif self.profile.kind == "askey":
            vals = np.clip(1.0 - np.outer(t, omegas), 0.0, None) ** (
                self.profile.ell_smoothness - 1
            )
        else:  # omega: exact-rational scalar path, small n only
            vals = np.empty((npairs, omegas.size))
            for p in range(npairs):
                for a, omega in enumerate(omegas):
                    vals[p, a] = profile_value(self.profile, omega, t[p])
        return np.einsum("pa,aij->pij", vals.astype(complex), gs)

    def eval(self, x, y) -> np.ndarray:
        d = _check_point(x, self.m) - _check_point(y, self.m)
        return self.eval_diffs(d[None, :])[0]


def radial_kernel(profile: RadialProfile, measure: OperatorMeasure, m: int) -> OperatorKernel:
    if not isinstance(profile, RadialProfile):
        raise NotRadial("radial_kernel needs a RadialProfile family")
    if not isinstance(measure, OperatorMeasure):
        raise InvalidMeasure("radial_kernel needs an OperatorMeasure")
    if int(m) < 1:
        raise InvalidPoint("ambient dimension must be >= 1")
    return OperatorKernel("radial", profile, measure, m)


def plane_wave_kernel(measure: PlaneWaveMeasure) -> OperatorKernel:
    if not isinstance(measure, PlaneWaveMeasure):
        raise InvalidMeasure("plane_wave_kernel needs a PlaneWaveMeasure")
    return OperatorKernel("plane_wave", None, measure, measure.m)


def _check_point(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (m,):
        raise InvalidPoint(f"expected a point in R^{m}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidPoint("point has non-finite entries")
    return x


def kernel_eval(kernel: OperatorKernel, x, y) -> np.ndarray:
    """K(x, y) as an ell x ell complex matrix (Hermitian only when x = y)."""
    return kernel.eval(x, y)


def radial_function_eval(kernel: OperatorKernel, t: float) -> np.ndarray:
    """The radial matrix function F with K(x, y) = F(||x - y||), at t >= 0.

    Plane-wave kernels are not radial -> NotRadial. F(0) equals the
    unrestricted total operator of the measure.
    """
    if not kernel.is_radial:
        raise NotRadial("plane-wave kernels have no radial function")
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise InvalidPoint("radial argument must be finite and >= 0")
    out = np.zeros((kernel.ell, kernel.ell), dtype=complex)
    for omega, g in kernel.measure.atoms:
        out += profile_value(kernel.profile, omega, t) * g.entries
    return out


def _deriv_value_radial(kernel: OperatorKernel, gamma: MultiIndex, d: np.ndarray) -> np.ndarray:
    """(d^gamma F)(d) for a radial kernel with jets, summed over atoms."""
    jet = jet_for_multi_index(kernel.m, gamma)
    s = float(d @ d)
    kmax = jet.max_k
    out = np.zeros((kernel.ell, kernel.ell), dtype=complex)
    for omega, g in kernel.measure.atoms:
        gvals = sjet_derivatives(kernel.profile, omega, s, kmax)
        out += jet_eval(jet, d, gvals) * g.entries
    return out


def _deriv_value_plane_wave(kernel: OperatorKernel, gamma: MultiIndex, d: np.ndarray) -> np.ndarray:
    """(d^gamma F)(d) for F(d) = sum_j exp(-i d.xi_j) G_j:
    each atom contributes (-i)^|gamma| xi^gamma exp(-i d.xi) G."""
    n = multi_index_order(gamma)
    out = np.zeros((kernel.ell, kernel.ell), dtype=complex)
    for xi, g in kernel.measure.atoms:
        coeff = (-1j) ** n
        for xij, gi in zip(xi, gamma):
            coeff *= xij ** gi
        out += coeff * np.exp(-1j * float(d @ xi)) * g.entries
    return out


def _fd_gamma(kernel: OperatorKernel, gamma: MultiIndex, d: np.ndarray, h: float) -> np.ndarray:
    """Nested central differences for (d^gamma F)(d)."""
    for i, gi in enumerate(gamma):
        if gi > 0:
            lowered = gamma[:i] + (gi - 1,) + gamma[i + 1 :]
            step = np.zeros_like(d)
            step[i] = h
            return (_fd_gamma(kernel, lowered, d + step, h) - _fd_gamma(kernel, lowered, d - step, h)) / (2 * h)
    return kernel.eval_diffs(d[None, :])[0]


def kernel_deriv_eval(
    kernel: OperatorKernel,
    alpha: MultiIndex,
    beta: MultiIndex,
    x,
    y,
    use_fd: bool = False,
) -> np.ndarray:
    """Mixed partial d^alpha_x d^beta_y K(x, y), total order capped at 8.

    Radial gaussian/omega and plane-wave kernels evaluate analytically.
    The askey family has no jets: with use_fd=True a central-difference
    fallback runs with step h = 1e-4 * max(1, ||x-y||), refusing (NearKink)
    whenever ||x-y|| is within 10h of a profile kink (t = 1/omega_j or 0);
    without use_fd it raises UnsupportedJet.
    """
    alpha = validate_multi_index(alpha, kernel.m)
    beta = validate_multi_index(beta, kernel.m)
    total_order = multi_index_order(alpha) + multi_index_order(beta)
    if total_order > JET_ORDER_CAP:
        raise UnsupportedJet(f"derivative order {total_order} exceeds cap {JET_ORDER_CAP}")
    x = _check_point(x, kernel.m)
    y = _check_point(y, kernel.m)
    d = x - y
    gamma = tuple(a + b for a, b in zip(alpha, beta))
    sign = (-1.0) ** multi_index_order(beta)
    if kernel.kind == "plane_wave":
        # split the (-1)^|beta| off the d^gamma form:
        # d^alpha_x d^beta_y exp(-i(x-y).xi) = (-1)^|beta| (d^gamma F)
        return sign * _deriv_value_plane_wave(kernel, gamma, d)
    if kernel.profile.kind in ("gaussian", "omega"):
        return sign * _deriv_value_radial(kernel, gamma, d)
    # askey: finite differences only
    if not use_fd:
        raise UnsupportedJet(
            "askey kernels have no analytic jets; pass use_fd=True to use the "
            "finite-difference fallback away from kinks"
        )
    t = float(np.linalg.norm(d))
    h = FD_STEP_FACTOR * max(1.0, t)
    guard = FD_KINK_RADIUS * h
    if t < guard:
        raise NearKink(f"||x-y|| = {t:.3e} is within {guard:.3e} of the kink at 0")
    for omega, _ in kernel.measure.atoms:
        if omega > 0.0 and abs(t - 1.0 / omega) < guard:
            raise NearKink(
                f"||x-y|| = {t:.3e} is within {guard:.3e} of the support-edge "
                f"kink at {1.0 / omega:.3e}"
            )
    return sign * _fd_gamma(kernel, gamma, d, h)


def deriv_diag_identity_check(kernel: OperatorKernel, alpha: MultiIndex, beta: MultiIndex) -> float:
    """Max entrywise |difference| between the derivative kernel on the
    diagonal and the closed-form moment expression.

    For gaussian atoms, p_w(x,y) = f(sqrt(w)(x-y)) with f(d) = exp(-||d||^2),
    so d^alpha_1 d^beta_2 K(x,x) = (-1)^|beta| (d^gamma f)(0) sum_j w_j^(|gamma|/2) G_j,
    with (d^gamma f)(0) = prod_i [gamma_i even: (-1)^(g/2) g!/(g/2)!, else 0].

    For omega(msrc) atoms, p_w(x,y) = f(w(x-y)) with f(d) = Omega_msrc(||d||),
    and (d^gamma f)(0) is read off the even power series of Omega: nonzero
    only for gamma = 2*kappa, where it equals
    (-1/4)^|kappa| / (kappa! (msrc/2)_|kappa|) * prod_i (2 kappa_i)!.

    Both closed forms are independent of the jet engine.
    """
    if not kernel.is_radial or kernel.profile.kind not in ("gaussian", "omega"):
        raise UnsupportedJet("diagonal identity check needs a gaussian or omega kernel")
    alpha = validate_multi_index(alpha, kernel.m)
    beta = validate_multi_index(beta, kernel.m)
    gamma = tuple(a + b for a, b in zip(alpha, beta))
    n = multi_index_order(gamma)
    if n > JET_ORDER_CAP:
        raise UnsupportedJet(f"derivative order {n} exceeds cap {JET_ORDER_CAP}")

    if any(g % 2 for g in gamma):
        f0 = 0.0
    elif kernel.profile.kind == "gaussian":
        f0 = 1.0
        for g in gamma:
            half = g // 2
            f0 *= (-1.0) ** half * math.factorial(g) / math.factorial(half)
    else:
        from fractions import Fraction

        from .profiles import _pochhammer

        kappa = tuple(g // 2 for g in gamma)
        k = sum(kappa)
        val = Fraction(-1, 4) ** k / _pochhammer(Fraction(kernel.profile.m_source, 2), k)
        for ki in kappa:
            val *= Fraction(math.factorial(2 * ki), math.factorial(ki))
        f0 = float(val)

    power = n // 2 if kernel.profile.kind == "gaussian" else n
    moment = np.zeros((kernel.ell, kernel.ell), dtype=complex)
    if f0 != 0.0:
        for omega, g in kernel.measure.atoms:
            moment += omega ** power * g.entries
    expected = (-1.0) ** multi_index_order(beta) * f0 * moment

    x0 = np.zeros(kernel.m)
    actual = kernel_deriv_eval(kernel, alpha, beta, x0, x0)
    return float(np.max(np.abs(actual - expected)))


# ----------------------------------------------------------------------
# block Grams
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class BlockGram:
    """Gram of K at n points: matrix is n*ell square, block (mu, nu) =
    K(x_mu, x_nu); row index = point_index * ell + component."""

    points: np.ndarray
    ell: int
    matrix: HermitianMatrix


@dataclass(frozen=True)
class DerivBlockGram:
    """Derivative Gram at jet order q: one block row per (point, multi-index)
    pair, multi-indices graded-lexicographic with |alpha| <= q; row index =
    (point_index * n_indices + index_rank) * ell + component; block
    ((mu,alpha),(nu,beta)) = d^alpha_1 d^beta_2 K(x_mu, x_nu)."""

    points: np.ndarray
    ell: int
    q: int
    multi_indices: tuple[MultiIndex, ...]
    matrix: HermitianMatrix


def _check_points(points, m: int, tol: float = DUPLICATE_POINT_TOL) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != m:
        raise InvalidPoint(f"expected an (n, {m}) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InvalidPoint("points have non-finite entries")
    n = pts.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if float(np.linalg.norm(pts[i] - pts[j])) < tol:
                raise DuplicatePoints(f"points {i} and {j} coincide to within {tol}")
    return pts


def gram(kernel: OperatorKernel, points, tol: float = DUPLICATE_POINT_TOL) -> BlockGram:
    """Assemble and symmetrize the block Gram at pairwise-distinct points."""
    pts = _check_points(points, kernel.m, tol)
    n = pts.shape[0]
    diffs = (pts[:, None, :] - pts[None, :, :]).reshape(n * n, kernel.m)
    blocks = kernel.eval_diffs(diffs).reshape(n, n, kernel.ell, kernel.ell)
    big = blocks.transpose(0, 2, 1, 3).reshape(n * kernel.ell, n * kernel.ell)
    return BlockGram(points=pts, ell=kernel.ell, matrix=HermitianMatrix(big))


def deriv_gram(kernel: OperatorKernel, points, q: int, tol: float = DUPLICATE_POINT_TOL) -> DerivBlockGram:
    """Assemble the derivative block Gram at jet order q (2q <= cap).

    Blocks share the (d^gamma F) values across (alpha, beta) pairs with equal
    gamma = alpha + beta, so each pair of points evaluates each gamma once.
    """
    q = int(q)
    if q < 0 or 2 * q > JET_ORDER_CAP:
        raise UnsupportedJet(f"need 0 <= 2q <= {JET_ORDER_CAP}, got q={q}")
    pts = _check_points(points, kernel.m, tol)
    n = pts.shape[0]
    idxs = multi_indices_up_to(kernel.m, q)
    na = len(idxs)
    ell = kernel.ell

    if q == 0:
        # only eval_diffs is needed here, so any kernel-shaped object works
        base = gram(kernel, pts, tol)
        return DerivBlockGram(points=pts, ell=ell, q=0, multi_indices=idxs, matrix=base.matrix)
    if getattr(kernel, "is_radial", False) and kernel.profile.kind == "askey":
        raise UnsupportedJet("askey kernels have no analytic jets for derivative Grams")
    if not isinstance(kernel, OperatorKernel):
        raise UnsupportedJet("derivative Grams need a kernel with analytic jets")

    gammas = sorted({tuple(a + b for a, b in zip(alpha, beta)) for alpha in idxs for beta in idxs})
    deriv_fn = _deriv_value_plane_wave if kernel.kind == "plane_wave" else _deriv_value_radial

    big = np.zeros((n * na * ell, n * na * ell), dtype=complex)
    for mu in range(n):
        for nu in range(n):
            d = pts[mu] - pts[nu]
            gvals = {gamma: deriv_fn(kernel, gamma, d) for gamma in gammas}
            for a, alpha in enumerate(idxs):
                for b, beta in enumerate(idxs):
                    gamma = tuple(ai + bi for ai, bi in zip(alpha, beta))
                    block = (-1.0) ** multi_index_order(beta) * gvals[gamma]
                    r = (mu * na + a) * ell
                    c = (nu * na + b) * ell
                    big[r : r + ell, c : c + ell] = block
    return DerivBlockGram(
        points=pts, ell=ell, q=q, multi_indices=idxs, matrix=HermitianMatrix(big)
    )


def scalar_projection_kernel(kernel: OperatorKernel, v):
    """The scalar kernel k_v(x, y) = <K(x, y) v, v> as a callable.

    Matches the kernel of the scalar projection measure: projecting the
    measure and then mixing equals projecting the mixed kernel.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (kernel.ell,) or float(np.linalg.norm(v)) == 0.0:
        raise InvalidPoint(f"projection direction must be a nonzero vector of length {kernel.ell}")

    def k_v(x, y) -> complex:
        return complex(np.vdot(v, kernel.eval(x, y) @ v))

    return k_v


def projected_scalar_measure_kernel(sm: ScalarMeasure, profile: RadialProfile):
    """Scalar radial kernel from a scalar measure: sum_j w_j p_{omega_j}."""

    def k(x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = float(np.linalg.norm(x - y))
        return sum(w * profile_value(profile, omega, t) for omega, w in sm.atoms)

    return k


# ----------------------------------------------------------------------
# CSV emission
# ----------------------------------------------------------------------


def gram_to_csv(g: BlockGram | DerivBlockGram) -> str:
    """Row-major CSV of the (complex) Gram, each entry flattened to a
    're,im' pair of cells, preceded by '#' header lines naming the layout."""
    buf = io.StringIO()
    n = g.points.shape[0]
    if isinstance(g, DerivBlockGram):
        buf.write(
            f"# deriv block gram: {n} points, jet order q={g.q}, "
            f"{len(g.multi_indices)} multi-indices, ell={g.ell}, "
            f"dim={g.matrix.dim}\n"
        )
        buf.write(
            "# row = (point_index * n_indices + index_rank) * ell + component\n"
        )
        buf.write(
            "# multi-indices (graded lex): "
            + ";".join(str(list(a)).replace(" ", "") for a in g.multi_indices)
            + "\n"
        )
    else:
        buf.write(f"# block gram: {n} points, ell={g.ell}, dim={g.matrix.dim}\n")
        buf.write("# row = point_index * ell + component\n")
    buf.write("# points: " + ";".join(",".join(repr(float(v)) for v in p) for p in g.points) + "\n")
    buf.write("# each complex entry is a re,im cell pair\n")
    mat = g.matrix.entries
    for row in mat:
        cells = []
        for v in row:
            cells.append(repr(float(v.real)))
            cells.append(repr(float(v.imag)))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
