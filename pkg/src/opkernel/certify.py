"""Certification tools: strictness probes, null directions, and two concrete
kernels that are positive definite but not strictly so.

demo_counterexample_shifted_gaussian builds the 2x2 kernel

    K(x, y) = [[ e^{-|d|^2},      e^{-|d + 2w|^2} ],
               [ e^{-|d - 2w|^2}, e^{-|d|^2}      ]],   d = x - y,

which is PD (it is E[ e^{i d Z} (c(Z) c(Z)^H) ] for a Gaussian frequency Z
and a bounded vector symbol) yet annihilates the vector measure
e1 delta_0 - e2 delta_{2w}: the four Gram numbers are 1, 1, e^0, e^0 and the
quadratic form collapses to 1 + 1 - 1 - 1, exactly zero in floating point.
Every scalar projection v^H K v stays strictly positive definite, which the
demo certifies on a seeded random design, so the degeneracy is genuinely an
operator-level phenomenon.

demo_counterexample_radial_bump discretizes a rank-one frequency-side
construction on the line: with a = FT(phi1), b = FT(phi2) (real, even bump
transforms), the matrix weights W(xi) = (b, -a)(b, -a)^H are PSD, and the
vector measure with atoms (phi1(x_i), phi2(x_i)) dx_i pairs to
sum_xi |a b - b a|^2 = 0 by construction -- every frequency atom is
annihilated identically, while the same kernel gives each single-component
measure a strictly positive form.

probe_strict_pd hammers a kernel with seeded random designs and reports the
smallest Gram eigenvalue seen; classify_and_report runs the exact
classification and the probe side by side and refuses to let them disagree
silently.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGrid, InvalidParameter, InvalidVector
from .hermitian import PSD_TOL, eigen_hermitian, min_eigenvalue, trace
from .kernel import (
    OperatorKernel,
    PlaneWaveMeasure,
    gram,
    plane_wave_kernel,
    radial_kernel,
    scalar_projection_kernel,
)
from .measures import (
    VERDICT_STRICT,
    OperatorMeasure,
    RadialClassification,
    classify_radial,
)
from .profiles import RadialProfile
from .rkhs import (
    DerivVectorMeasure,
    VectorAtomMeasure,
    quadratic_form,
    quadratic_form_detail,
)

PROBE_TOL = 1e-10
PROJECTION_FLOOR_TOL = 1e-8
WITNESS_DESIGN_TOL = 1e-9


class ShiftedPairKernel:
    """The 2x2 shifted-gaussian kernel above; w is the shift vector."""

    __slots__ = ("w", "m", "ell", "kind")

    def __init__(self, w):
        w = np.asarray(w, dtype=float)
        if w.ndim != 1 or w.size < 1 or not np.all(np.isfinite(w)):
            raise InvalidVector("shift w must be a finite nonempty vector")
        if float(np.linalg.norm(w)) == 0.0:
            raise InvalidParameter("shift w must be nonzero")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "m", int(w.size))
        object.__setattr__(self, "ell", 2)
        object.__setattr__(self, "kind", "shifted_pair")

    def __setattr__(self, name, value):
        raise AttributeError("ShiftedPairKernel is immutable")

    def eval_diffs(self, diffs: np.ndarray) -> np.ndarray:
        diffs = np.asarray(diffs, dtype=float)
        n = diffs.shape[0]
        out = np.zeros((n, 2, 2), dtype=complex)
        s0 = np.sum(diffs * diffs, axis=1)
        sp = np.sum((diffs + 2.0 * self.w) ** 2, axis=1)
        sm = np.sum((diffs - 2.0 * self.w) ** 2, axis=1)
        out[:, 0, 0] = np.exp(-s0)
        out[:, 1, 1] = np.exp(-s0)
        out[:, 0, 1] = np.exp(-sp)
        out[:, 1, 0] = np.exp(-sm)
        return out

    def eval(self, x, y) -> np.ndarray:
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return self.eval_diffs(d.reshape(1, self.m))[0]


@dataclass(frozen=True)
class CounterexampleResult:
    mixed_form: float
    projection_floor: float
    params: dict
    reference_form: float | None = None
    relative_form: float | None = None


def _seeded_design(m: int, n: int, seed_parts, box: float) -> np.ndarray:
    """n points in [-box, box]^m, seeded, with a minimum-separation retry.

    The separation floor (1e-2 * box) keeps near-coincident points from
    collapsing a genuinely strict Gram to numerical zero, which would fake
    a strictness violation; a truly degenerate kernel is singular on every
    design, so the floor costs nothing there."""
    rng = np.random.default_rng(np.random.SeedSequence(list(seed_parts)))
    min_dist = 1e-2 * box
    for _ in range(64):
        pts = rng.uniform(-box, box, size=(n, m))
        ok = True
        for i in range(n):
            for j in range(i + 1, n):
                if float(np.linalg.norm(pts[i] - pts[j])) < min_dist:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return pts
    raise InvalidParameter("could not draw a separated design; box too small for n")


def demo_counterexample_shifted_gaussian(w, seed: int = 0) -> CounterexampleResult:
    """Quadratic form of the annihilated measure (exactly 0.0 in floats) and
    the smallest scalar-projection Gram eigenvalue over a seeded design."""
    kernel = ShiftedPairKernel(w)
    m = kernel.m
    origin = np.zeros(m)
    shift = 2.0 * kernel.w
    e1 = np.array([1.0, 0.0], dtype=complex)
    e2 = np.array([0.0, 1.0], dtype=complex)
    eta = DerivVectorMeasure.plain(
        VectorAtomMeasure(m, 2, [(origin, e1), (shift, -e2)])
    )
    mixed = quadratic_form(kernel, eta)

    directions = (e1, e2, e1 + e2, e1 + 1j * e2)
    floor = np.inf
    pts = _seeded_design(m, 6, (int(seed), 0), box=2.0)
    for k, v in enumerate(directions):
        sk = scalar_projection_kernel(kernel, v)
        g = np.empty((6, 6), dtype=complex)
        for i in range(6):
            for j in range(6):
                g[i, j] = sk(pts[i], pts[j])
        from .hermitian import HermitianMatrix

        floor = min(floor, min_eigenvalue(HermitianMatrix(g)))
    return CounterexampleResult(
        mixed_form=mixed,
        projection_floor=float(floor),
        params={"w": [float(c) for c in kernel.w], "seed": int(seed), "design_n": 6},
    )


def _bump(x: np.ndarray) -> np.ndarray:
    """exp(-1/(1-x^2)) on |x|<1, 0 outside."""
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


def _cos_transform(values: np.ndarray, x: np.ndarray, wts: np.ndarray, xis: np.ndarray) -> np.ndarray:
    """Real trapezoid cosine transform sum_i values_i cos(x_i xi) wts_i."""
    return (values * wts) @ np.cos(np.outer(x, xis))


def demo_counterexample_radial_bump(
    grid_n: int = 512, box: float = 4.0, m: int = 1
) -> CounterexampleResult:
    """Discrete rank-one frequency construction on the line (m = 1).

    Builds a plane-wave mixture kernel whose 2x2 frequency weights are
    outer((b, -a)) with a, b the discrete cosine transforms of the two bumps
    phi1, phi2(x) = phi1(2x); the companion vector measure with atom vectors
    (phi1(x_i), phi2(x_i)) * dx_i is annihilated frequency-by-frequency, so
    the mixed form vanishes to roundoff while the phi1-only measure keeps a
    strictly positive form (the reference). One dimension already exhibits
    the phenomenon; higher m is not implemented."""
    if int(m) != 1:
        raise InvalidParameter("the bump construction is implemented for m = 1 only")
    grid_n = int(grid_n)
    if grid_n < 128:
        raise InvalidGrid("need grid_n >= 128 for a usable discretization")
    box = float(box)
    if not box > 1.0:
        raise InvalidGrid("need box > 1 so the bumps are fully supported")

    x = np.linspace(-box, box, grid_n)
    dx = x[1] - x[0]
    wts = np.full(grid_n, dx)
    wts[0] = wts[-1] = dx / 2.0

    phi1 = _bump(x)
    phi2 = _bump(2.0 * x)

    xi_max = 32.0
    xis = np.linspace(-xi_max, xi_max, grid_n)
    dxi = xis[1] - xis[0]
    xiw = np.full(grid_n, dxi)
    xiw[0] = xiw[-1] = dxi / 2.0

    a = _cos_transform(phi1, x, wts, xis)
    b = _cos_transform(phi2, x, wts, xis)

    atoms = []
    for k in range(grid_n):
        u = np.array([b[k], -a[k]], dtype=float)
        atoms.append((np.array([xis[k]]), xiw[k] * np.outer(u, u)))
    pw = PlaneWaveMeasure(2, 1, atoms)
    kernel = plane_wave_kernel(pw)

    mixed_atoms = []
    ref_atoms = []
    for i in range(grid_n):
        v = np.array([phi1[i] * wts[i], phi2[i] * wts[i]], dtype=complex)
        mixed_atoms.append((np.array([x[i]]), v))
        ref_atoms.append((np.array([x[i]]), np.array([phi1[i] * wts[i], 0.0], dtype=complex)))
    eta = DerivVectorMeasure.plain(VectorAtomMeasure(1, 2, mixed_atoms))
    eta_ref = DerivVectorMeasure.plain(VectorAtomMeasure(1, 2, ref_atoms))

    mixed = quadratic_form(kernel, eta)
    ref_detail = quadratic_form_detail(kernel, eta_ref)
    reference = ref_detail.value
    relative = abs(mixed) / reference if reference > 0 else float("inf")
    return CounterexampleResult(
        mixed_form=mixed,
        projection_floor=reference,
        reference_form=reference,
        relative_form=relative,
        params={
            "grid_n": grid_n,
            "box": box,
            "xi_max": xi_max,
            "reference_scale": ref_detail.scale,
        },
    )


# ----------------------------------------------------------------------
# random-design probe and exact-vs-probe consistency
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeViolation:
    trial: int
    points: np.ndarray
    min_eigenvalue: float
    witness: np.ndarray


@dataclass(frozen=True)
class ProbeReport:
    verdict: str  # "NoViolationFound" | "ViolationFound"
    trials: int
    n: int
    box: float
    seed: int
    tol: float
    min_eigenvalues: tuple[float, ...]
    global_min: float
    violation: ProbeViolation | None = None


def _probe_one(kernel, n: int, seed: int, trial: int, box: float):
    pts = _seeded_design(kernel.m, n, (seed, trial), box)
    g = gram(kernel, pts)
    dec = eigen_hermitian(g.matrix)
    lo = float(dec.eigenvalues[0])
    scale = max(1.0, trace(g.matrix))
    return pts, lo, scale, dec.eigenvectors[:, 0].copy()


def probe_strict_pd(
    kernel,
    n: int = 4,
    trials: int = 20,
    seed: int = 0,
    box: float = 2.0,
    tol: float = PROBE_TOL,
    jobs: int = 1,
) -> ProbeReport:
    """Draw seeded random designs and eigen-check each block Gram.

    A trial violates when min eig <= tol * max(1, trace). Results are
    deterministic in (seed, trial) regardless of jobs: each trial derives
    its own generator from SeedSequence([seed, trial])."""
    n, trials, seed, jobs = int(n), int(trials), int(seed), int(jobs)
    if n < 2 or trials < 1:
        raise InvalidParameter("need n >= 2 points and trials >= 1")
    if jobs < 1:
        raise InvalidParameter("jobs must be >= 1")
    results: list = [None] * trials
    if jobs == 1:
        for t in range(trials):
            results[t] = _probe_one(kernel, n, seed, t, box)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            futs = {ex.submit(_probe_one, kernel, n, seed, t, box): t for t in range(trials)}
            for fut, t in futs.items():
                results[t] = fut.result()
    mins = tuple(float(r[1]) for r in results)
    violation = None
    for t, (pts, lo, scale, vec) in enumerate(results):
        if lo <= tol * scale:
            violation = ProbeViolation(
                trial=t, points=pts, min_eigenvalue=lo, witness=vec
            )
            break
    return ProbeReport(
        verdict="ViolationFound" if violation is not None else "NoViolationFound",
        trials=trials,
        n=n,
        box=box,
        seed=seed,
        tol=tol,
        min_eigenvalues=mins,
        global_min=float(min(mins)),
        violation=violation,
    )


@dataclass(frozen=True)
class NullDirection:
    eigenvalue: float
    vector: np.ndarray  # stacked unit vector, length n*ell
    measure: VectorAtomMeasure


def find_null_direction(kernel, points) -> NullDirection:
    """Smallest-eigenvalue direction of the block Gram on the given points,
    repackaged as the vector atomic measure it represents."""
    g = gram(kernel, points)
    dec = eigen_hermitian(g.matrix)
    vec = dec.eigenvectors[:, 0]
    ell = g.ell
    atoms = [
        (g.points[i].copy(), vec[i * ell : (i + 1) * ell].copy())
        for i in range(g.points.shape[0])
    ]
    return NullDirection(
        eigenvalue=float(dec.eigenvalues[0]),
        vector=vec.copy(),
        measure=VectorAtomMeasure(kernel.m, ell, atoms),
    )


def witness_design_mineig(kernel: OperatorKernel, witness: np.ndarray):
    """Smallest Gram eigenvalue on the canonical two-point design {0, e1}.

    For a kernel whose positive-frequency mass misses the witness direction,
    this eigenvalue sits at numerical zero (<= 1e-9 * scale)."""
    m = kernel.m
    pts = np.zeros((2, m))
    pts[1, 0] = 1.0
    g = gram(kernel, pts)
    lo = min_eigenvalue(g.matrix)
    scale = max(1.0, trace(g.matrix))
    return float(lo), float(scale)


@dataclass(frozen=True)
class ClassificationReport:
    classification: RadialClassification
    probe: ProbeReport
    consistent: bool
    jet_order: int
    witness_design: tuple[float, float] | None = None  # (min eig, scale)
    notes: tuple[str, ...] = field(default=())


def classify_and_report(
    measure: OperatorMeasure,
    profile: RadialProfile,
    m: int,
    n: int = 4,
    trials: int = 20,
    seed: int = 0,
    box: float = 2.0,
    tol: float = PSD_TOL,
    probe_tol: float = PROBE_TOL,
) -> ClassificationReport:
    """Exact classification plus a probe, with the consistency contract:
    a Strict verdict must survive every probe trial, a NotStrict verdict
    must be corroborated by a concrete degenerate design. Disagreement is
    reported (consistent=False), never silently dropped."""
    m = int(m)
    if profile.kind == "askey" and m > 2 * profile.ell_smoothness - 3:
        raise InvalidParameter(
            f"askey family with ell={profile.ell_smoothness} supports dimensions "
            f"m <= {2 * profile.ell_smoothness - 3} only"
        )
    cls = classify_radial(measure, profile, tol=tol)
    kernel = radial_kernel(profile, measure, m)
    probe = probe_strict_pd(kernel, n=n, trials=trials, seed=seed, box=box, tol=probe_tol)

    notes: list[str] = []
    witness_design = None
    if cls.verdict == VERDICT_STRICT:
        consistent = probe.verdict == "NoViolationFound"
        if not consistent:
            notes.append(
                "exact classification says strictly PD but a probe design "
                f"degenerated at trial {probe.violation.trial}"
            )
    else:
        # a degenerate kernel is singular on EVERY design (the eigensolver
        # finds the bad direction itself), so the probe must corroborate too
        witness_design = witness_design_mineig(kernel, cls.witness)
        corroborated = witness_design[0] <= WITNESS_DESIGN_TOL * witness_design[1]
        consistent = corroborated and probe.verdict == "ViolationFound"
        if not corroborated:
            notes.append(
                "exact classification says not strictly PD but the witness "
                "design did not degenerate"
            )
        if probe.verdict == "NoViolationFound":
            notes.append(
                "exact classification says not strictly PD but no probe "
                "design degenerated"
            )
    if profile.kind == "askey":
        jet_order = (profile.ell_smoothness - 2) // 2
    else:
        jet_order = 8
    if profile.kind == "omega" and m < profile.m_source:
        notes.append(
            f"omega({profile.m_source}) restricted to dimension {m}: strictness "
            "and smooth-function approximation hold, but decay at infinity "
            "(c0 membership) is not implied"
        )
    return ClassificationReport(
        classification=cls,
        probe=probe,
        consistent=consistent,
        jet_order=jet_order,
        witness_design=witness_design,
        notes=tuple(notes),
    )
