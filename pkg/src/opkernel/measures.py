"""Finite nonnegative operator-valued measures on the scale half-line.

An OperatorMeasure is a finite atomic measure sum_j G_j delta_{omega_j} with
scalar supports omega_j >= 0 and PSD matrix weights G_j acting on C^ell.
Mixing a scalar radial family against such a measure produces the
operator-valued kernels in kernel.py; whether that kernel is strictly PD
and universal is decided *exactly* here from the measure alone:

    strictly PD and universal  <=>  sum_{omega_j > 0} G_j is nonsingular.

Also provides the discrete Radon-Nikodym decomposition against the trace
measure (scalar weights tr G_j, trace-one PSD densities G_j / tr G_j) and
scalar projection measures omega_j -> <G_j v, v>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidMeasure, InvalidVector, NotRadial, SchemaError
from .hermitian import (
    PSD_TOL,
    HermitianMatrix,
    eigen_hermitian,
    is_psd,
    trace,
)
from .profiles import RadialProfile

# Weights this slightly negative are treated as roundoff and clamped to 0.
WEIGHT_ROUNDOFF_TOL = 1e-12


class OperatorMeasure:
    """Finite atomic nonnegative operator measure on [0, infinity).

    Atoms are (omega, G) with omega >= 0 and G PSD (checked at default
    tolerance). Atoms at exactly equal supports are merged by summing their
    matrices; atoms whose matrix is zero (trace 0) are pruned, but their
    supports are remembered in null_supports for decomposition reports.
    Atoms are stored sorted by support.
    """

    __slots__ = ("dim", "atoms", "null_supports")

    def __init__(self, dim: int, atoms):
        dim = int(dim)
        if dim < 1:
            raise InvalidMeasure("dim must be >= 1")
        merged: dict[float, np.ndarray] = {}
        for omega, g in atoms:
            omega = float(omega)
            if not math.isfinite(omega) or omega < 0.0:
                raise InvalidMeasure(f"support point must be finite and >= 0, got {omega}")
            gh = g if isinstance(g, HermitianMatrix) else HermitianMatrix(g)
            if gh.dim != dim:
                raise InvalidMeasure(f"atom matrix has dim {gh.dim}, expected {dim}")
            check = is_psd(gh)
            if not check.ok:
                raise InvalidMeasure(
                    f"atom at omega={omega} is not PSD "
                    f"(min eigenvalue {check.min_eigenvalue:.3e})"
                )
            if omega in merged:
                merged[omega] = merged[omega] + gh.entries
            else:
                merged[omega] = gh.entries
        kept = []
        nulls = []
        for omega in sorted(merged):
            gh = HermitianMatrix(merged[omega])
            if trace(gh) <= 0.0:
                nulls.append(omega)
            else:
                kept.append((omega, gh))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "atoms", tuple(kept))
        object.__setattr__(self, "null_supports", tuple(nulls))

    def __setattr__(self, name, value):
        raise AttributeError("OperatorMeasure is immutable")

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f"OperatorMeasure(dim={self.dim}, atoms={len(self.atoms)})"


class ScalarMeasure:
    """Finite atomic scalar measure with nonnegative weights.

    Weights in [-1e-12, 0) are clamped to zero (roundoff from quadratic
    forms); genuinely negative weights raise InvalidMeasure. Zero-weight
    atoms are kept: a projection can legitimately kill an atom, and the
    support is still information.
    """

    __slots__ = ("atoms",)

    def __init__(self, atoms):
        merged: dict[float, float] = {}
        for omega, w in atoms:
            omega, w = float(omega), float(w)
            if not (math.isfinite(omega) and math.isfinite(w)) or omega < 0.0:
                raise InvalidMeasure("scalar atoms must be finite with omega >= 0")
            merged[omega] = merged.get(omega, 0.0) + w
        out = []
        for omega in sorted(merged):
            w = merged[omega]
            if w < -WEIGHT_ROUNDOFF_TOL:
                raise InvalidMeasure(f"negative weight {w} at omega={omega}")
            out.append((omega, max(0.0, w)))
        object.__setattr__(self, "atoms", tuple(out))

    def __setattr__(self, name, value):
        raise AttributeError("ScalarMeasure is immutable")

    def __len__(self):
        return len(self.atoms)


@dataclass(frozen=True)
class RNDecomposition:
    """Discrete Radon-Nikodym decomposition against the trace measure.

    trace_measure carries weights tr G_j > 0; densities[j] is the trace-one
    PSD matrix G_j / tr G_j at the same support; null_atoms lists supports
    whose matrix was zero (no density there).
    """

    trace_measure: ScalarMeasure
    densities: tuple[HermitianMatrix, ...]
    null_atoms: tuple[float, ...]


def radon_nikodym(measure: OperatorMeasure) -> RNDecomposition:
    traces = [(omega, trace(g)) for omega, g in measure.atoms]
    densities = tuple(
        HermitianMatrix(g.entries / tr) for (_, g), (_, tr) in zip(measure.atoms, traces)
    )
    return RNDecomposition(
        trace_measure=ScalarMeasure(traces),
        densities=densities,
        null_atoms=measure.null_supports,
    )


def scalar_projection_measure(measure: OperatorMeasure, v) -> ScalarMeasure:
    """Project onto direction v: atom weights become <G_j v, v> (real >= 0)."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.shape[0] != measure.dim:
        raise InvalidVector(f"expected a vector of length {measure.dim}")
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise InvalidVector("vector has non-finite entries")
    if float(np.linalg.norm(v)) == 0.0:
        raise InvalidVector("projection direction must be nonzero")
    return ScalarMeasure(
        (omega, float(np.vdot(v, g.entries @ v).real)) for omega, g in measure.atoms
    )


def total_operator(measure: OperatorMeasure, restrict_positive_support: bool = False) -> HermitianMatrix:
    """Sum of atom matrices; restricted variant drops any atom at omega = 0."""
    total = np.zeros((measure.dim, measure.dim), dtype=complex)
    for omega, g in measure.atoms:
        if restrict_positive_support and omega == 0.0:
            continue
        total = total + g.entries
    return HermitianMatrix(total)


def c0_membership(measure: OperatorMeasure) -> bool:
    """True iff no surviving atom sits at omega = 0 (kernel decays at infinity)."""
    return all(omega > 0.0 for omega, _ in measure.atoms)


VERDICT_STRICT = "StrictlyPD_and_Universal"
VERDICT_NOT_STRICT = "NotStrictlyPD"


@dataclass(frozen=True)
class RadialClassification:
    verdict: str
    min_eigenvalue: float  # of the support-restricted total operator
    witness: np.ndarray | None  # unit eigenvector of the minimal eigenvalue
    family_kind: str
    dim: int


def classify_radial(
    measure: OperatorMeasure, family: RadialProfile, tol: float = PSD_TOL
) -> RadialClassification:
    """Exact strict-PD / universality classification of a radial mixture.

    The mixture of any radial family here against the measure is strictly PD
    (and universal for its smoothness class) exactly when the total operator
    restricted to positive supports is nonsingular; the verdict is decided
    from min_eigenvalue of that total at tolerance tol * max(1, trace).
    """
    if not isinstance(family, RadialProfile):
        raise NotRadial("classification applies to radial families only")
    total = total_operator(measure, restrict_positive_support=True)
    dec = eigen_hermitian(total)
    lam = float(dec.eigenvalues[0])
    cutoff = tol * max(1.0, trace(total))
    if lam > cutoff:
        return RadialClassification(
            verdict=VERDICT_STRICT,
            min_eigenvalue=lam,
            witness=None,
            family_kind=family.kind,
            dim=measure.dim,
        )
    return RadialClassification(
        verdict=VERDICT_NOT_STRICT,
        min_eigenvalue=lam,
        witness=dec.eigenvectors[:, 0].copy(),
        family_kind=family.kind,
        dim=measure.dim,
    )


# ----------------------------------------------------------------------
# JSON schema
# ----------------------------------------------------------------------


def _matrix_from_json(obj, what: str) -> HermitianMatrix:
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be an object with 're' (and optional 'im')")
    unknown = set(obj) - {"re", "im"}
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)} in {what}")
    if "re" not in obj:
        raise SchemaError(f"missing field 're' in {what}")
    re = np.asarray(obj["re"], dtype=float)
    if "im" in obj:
        im = np.asarray(obj["im"], dtype=float)
        if im.shape != re.shape:
            raise SchemaError(f"'re' and 'im' shapes differ in {what}")
    else:
        im = np.zeros_like(re)
    try:
        return HermitianMatrix(re + 1j * im)
    except Exception as exc:
        raise SchemaError(f"bad matrix in {what}: {exc}") from exc


def _matrix_to_json(g: HermitianMatrix) -> dict:
    return {
        "re": [[float(v) for v in row] for row in g.entries.real],
        "im": [[float(v) for v in row] for row in g.entries.imag],
    }


def measure_from_json(obj) -> OperatorMeasure:
    """Parse {"dim": l, "atoms": [{"omega": w, "G": {"re": [[..]], "im": [[..]]}}]}.

    Unknown fields are rejected; matrices are symmetrized and PSD-validated.
    """
    if not isinstance(obj, dict):
        raise SchemaError("measure descriptor must be an object")
    unknown = set(obj) - {"dim", "atoms"}
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)} in measure descriptor")
    for field in ("dim", "atoms"):
        if field not in obj:
            raise SchemaError(f"missing field '{field}' in measure descriptor")
    if not isinstance(obj["atoms"], list):
        raise SchemaError("'atoms' must be a list")
    atoms = []
    for i, atom in enumerate(obj["atoms"]):
        if not isinstance(atom, dict):
            raise SchemaError(f"atom {i} must be an object")
        unknown = set(atom) - {"omega", "G"}
        if unknown:
            raise SchemaError(f"unknown fields {sorted(unknown)} in atom {i}")
        for field in ("omega", "G"):
            if field not in atom:
                raise SchemaError(f"missing field '{field}' in atom {i}")
        if not isinstance(atom["omega"], (int, float)) or isinstance(atom["omega"], bool):
            raise SchemaError(f"atom {i} 'omega' must be a number")
        atoms.append((float(atom["omega"]), _matrix_from_json(atom["G"], f"atom {i} 'G'")))
    try:
        dim = int(obj["dim"])
    except (TypeError, ValueError) as exc:
        raise SchemaError("'dim' must be an integer") from exc
    return OperatorMeasure(dim, atoms)


def measure_to_json(measure: OperatorMeasure) -> dict:
    return {
        "dim": measure.dim,
        "atoms": [
            {"omega": float(omega), "G": _matrix_to_json(g)} for omega, g in measure.atoms
        ],
    }
