"""Command-line front end.

Subcommands: eval, gram, deriv-gram, classify, demo, interp, monotone,
probe. Inputs are JSON descriptor files (--input); unknown fields are
rejected with exit code 2 and a message naming the offender. Reports are
JSON with sorted keys, embed the parsed input descriptor plus the seed and
effective tolerances, and are byte-identical across reruns with the same
seed under --no-timestamp.

Exit codes: 0 success / affirmative verdict, 2 input error, 3 negative
verdict (NotStrictlyPD, failed monotonicity, probe violation, demo sign
pattern not reproduced), 4 numerical failure (NotPSD / IllConditioned /
NumericalFailure).
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys

import numpy as np

from . import __version__
from .certify import (
    PROBE_TOL,
    PROJECTION_FLOOR_TOL,
    classify_and_report,
    demo_counterexample_radial_bump,
    demo_counterexample_shifted_gaussian,
    probe_strict_pd,
)
from .errors import (
    DuplicatePoints,
    IllConditioned,
    InvalidGrid,
    InvalidMatrix,
    InvalidMeasure,
    InvalidParameter,
    InvalidPoint,
    InvalidVector,
    NearKink,
    NotPSD,
    NotRadial,
    NumericalFailure,
    SchemaError,
    UnsupportedJet,
)
from .hermitian import PSD_TOL, min_eigenvalue
from .kernel import (
    DUPLICATE_POINT_TOL,
    PlaneWaveMeasure,
    deriv_gram,
    gram,
    gram_to_csv,
    kernel_eval,
    plane_wave_kernel,
    radial_function_eval,
    radial_kernel,
)
from .measures import _matrix_from_json, measure_from_json
from .profiles import (
    CM_DEFAULT_H,
    RadialProfile,
    completely_monotone_check,
    ell_cm_check,
    williamson_construct,
)
from .rkhs import hermite_interpolate, interpolate, rkhs_eval

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NEGATIVE = 3
EXIT_NUMERIC = 4

DEMO_MIXED_TOL = 1e-12
DEMO_RELATIVE_TOL = 1e-6
DEMO_REFERENCE_FLOOR = 1e-4

_INPUT_ERRORS = (
    SchemaError,
    InvalidParameter,
    InvalidGrid,
    InvalidMeasure,
    InvalidVector,
    InvalidPoint,
    InvalidMatrix,
    NotRadial,
    DuplicatePoints,
    UnsupportedJet,
    NearKink,
    FileNotFoundError,
    IsADirectoryError,
)
_NUMERIC_ERRORS = (NotPSD, IllConditioned, NumericalFailure)

# tolerance registry: every CLI-level knob defaults from a module constant
# and lands in the report so pinned numbers stay reproducible
_TOL_DEFAULTS = {
    "psd": PSD_TOL,  # classification / PSD cutoff
    "probe": PROBE_TOL,  # probe violation threshold
    "duplicate": DUPLICATE_POINT_TOL,  # coincident-point rejection in Grams
    "ridge": None,  # interpolation ridge; None = data-scaled default
}


# ----------------------------------------------------------------------
# small JSON plumbing
# ----------------------------------------------------------------------


def _fields(obj, what: str, required, optional=()):
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be a JSON object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)} in {what}")
    for field in required:
        if field not in obj:
            raise SchemaError(f"missing field '{field}' in {what}")


def _int_field(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"'{name}' must be an integer")
    return value


def _float_field(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"'{name}' must be a number")
    return float(value)


def _point_field(value, name: str, m: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'{name}' must be a list of numbers") from exc
    if arr.shape != (m,) or not np.all(np.isfinite(arr)):
        raise SchemaError(f"'{name}' must be a finite vector of length {m}")
    return arr


def _points_field(value, name: str, m: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'{name}' must be a list of points") from exc
    if arr.ndim == 1 and m == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != m or arr.shape[0] < 1 or not np.all(
        np.isfinite(arr)
    ):
        raise SchemaError(f"'{name}' must be a nonempty list of length-{m} points")
    return arr


def _cvec_json(v: np.ndarray) -> dict:
    return {"re": [float(c) for c in v.real], "im": [float(c) for c in v.imag]}


def _cmat_json(mat: np.ndarray) -> dict:
    return {
        "re": [[float(c) for c in row] for row in mat.real],
        "im": [[float(c) for c in row] for row in mat.imag],
    }


def _cvec_from_json(obj, what: str) -> np.ndarray:
    _fields(obj, what, ("re",), ("im",))
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what} entries must be numbers") from exc
    if re.shape != im.shape:
        raise SchemaError(f"'re' and 'im' shapes differ in {what}")
    return re + 1j * im


# ----------------------------------------------------------------------
# kernel descriptors
# ----------------------------------------------------------------------


def family_from_json(obj):
    """Parse a family descriptor; returns a RadialProfile, or None for the
    plane-wave family (which carries no radial profile)."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError("family descriptor needs a 'kind' field")
    kind = obj["kind"]
    if kind == "gaussian":
        _fields(obj, "gaussian family", ("kind",))
        return RadialProfile.gaussian()
    if kind == "askey":
        _fields(obj, "askey family", ("kind", "ell"))
        return RadialProfile.askey(_int_field(obj["ell"], "ell"))
    if kind == "omega":
        _fields(obj, "omega family", ("kind", "m"))
        return RadialProfile.omega(_int_field(obj["m"], "m"))
    if kind == "plane_wave":
        _fields(obj, "plane-wave family", ("kind",))
        return None
    raise SchemaError(f"unknown family kind '{kind}'")


def plane_wave_measure_from_json(obj, m: int) -> PlaneWaveMeasure:
    _fields(obj, "plane-wave measure", ("dim", "atoms"))
    dim = _int_field(obj["dim"], "dim")
    if not isinstance(obj["atoms"], list):
        raise SchemaError("'atoms' must be a list")
    atoms = []
    for i, atom in enumerate(obj["atoms"]):
        _fields(atom, f"plane-wave atom {i}", ("xi", "G"))
        xi = _point_field(atom["xi"], f"atom {i} 'xi'", m)
        g = _matrix_from_json(atom["G"], f"plane-wave atom {i}")
        atoms.append((xi, g.entries))
    return PlaneWaveMeasure(dim, m, atoms)


def kernel_from_json(obj):
    _fields(obj, "kernel descriptor", ("family", "measure", "ambient_dim"))
    m = _int_field(obj["ambient_dim"], "ambient_dim")
    profile = family_from_json(obj["family"])
    if profile is None:
        return plane_wave_kernel(plane_wave_measure_from_json(obj["measure"], m))
    return radial_kernel(profile, measure_from_json(obj["measure"]), m)


# ----------------------------------------------------------------------
# report plumbing
# ----------------------------------------------------------------------


def _parse_tols(pairs) -> dict:
    tols = dict(_TOL_DEFAULTS)
    for pair in pairs or ():
        name, sep, value = pair.partition("=")
        if not sep:
            raise SchemaError(f"--tol wants NAME=VALUE, got '{pair}'")
        if name not in tols:
            raise SchemaError(
                f"unknown tolerance '{name}' (known: {sorted(tols)})"
            )
        try:
            tols[name] = float(value)
        except ValueError as exc:
            raise SchemaError(f"--tol {name} needs a numeric value") from exc
    return tols


def _report(args, command: str, input_obj, result: dict) -> dict:
    rep = {
        "command": command,
        "input": input_obj,
        "seed": args.seed,
        "tolerances": args.tols,
        "version": __version__,
        "result": result,
    }
    if not args.no_timestamp:
        rep["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return rep


def _emit(args, rep: dict) -> None:
    text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_input(args):
    if not args.input:
        raise SchemaError("this command requires --input PATH (a JSON descriptor)")
    try:
        with open(args.input) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"input is not valid JSON: {exc}") from exc


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def cmd_eval(args) -> int:
    obj = _load_input(args)
    _fields(obj, "eval input", ("kernel",), ("x", "y", "t"))
    kernel = kernel_from_json(obj["kernel"])
    if "t" in obj:
        if "x" in obj or "y" in obj:
            raise SchemaError("give either 'x' and 'y' or 't', not both")
        value = radial_function_eval(kernel, _float_field(obj["t"], "t"))
    else:
        for field in ("x", "y"):
            if field not in obj:
                raise SchemaError(f"missing field '{field}' in eval input")
        value = kernel_eval(
            kernel,
            _point_field(obj["x"], "x", kernel.m),
            _point_field(obj["y"], "y", kernel.m),
        )
    _emit(args, _report(args, "eval", obj, {"matrix": _cmat_json(value)}))
    return EXIT_OK


def _gram_layout(g, q=None) -> dict:
    layout = {
        "n_points": int(g.points.shape[0]),
        "ell": g.ell,
        "dim": g.matrix.dim,
        "points": [[float(c) for c in p] for p in g.points],
    }
    if q is None:
        layout["row_layout"] = "point_index * ell + component"
    else:
        layout["q"] = g.q
        layout["multi_indices"] = [list(a) for a in g.multi_indices]
        layout["row_layout"] = "(point_index * n_indices + index_rank) * ell + component"
    return layout


def _run_gram(args, command: str) -> int:
    obj = _load_input(args)
    if command == "deriv-gram":
        _fields(obj, "deriv-gram input", ("kernel", "points", "q"))
        q = _int_field(obj["q"], "q")
    else:
        _fields(obj, "gram input", ("kernel", "points"))
        q = None
    kernel = kernel_from_json(obj["kernel"])
    pts = _points_field(obj["points"], "points", kernel.m)
    if q is None:
        g = gram(kernel, pts, tol=args.tols["duplicate"])
    else:
        g = deriv_gram(kernel, pts, q, tol=args.tols["duplicate"])
    lo = min_eigenvalue(g.matrix)
    meta = _gram_layout(g, q)
    meta["min_eigenvalue"] = float(lo)
    if args.format == "csv":
        if not args.output:
            raise SchemaError("--format csv needs --output PATH for the matrix")
        with open(args.output, "w") as fh:
            fh.write(gram_to_csv(g))
        sidecar = _report(args, command, obj, meta)
        with open(args.output + ".meta.json", "w") as fh:
            fh.write(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        sys.stdout.write(
            f"wrote {args.output} and {args.output}.meta.json "
            f"(dim {g.matrix.dim}, min eigenvalue {lo!r})\n"
        )
        return EXIT_OK
    result = dict(meta)
    result["matrix"] = _cmat_json(g.matrix.entries)
    _emit(args, _report(args, command, obj, result))
    return EXIT_OK


def cmd_gram(args) -> int:
    return _run_gram(args, "gram")


def cmd_deriv_gram(args) -> int:
    return _run_gram(args, "deriv-gram")


def cmd_classify(args) -> int:
    obj = _load_input(args)
    _fields(
        obj,
        "classify input",
        ("family", "measure", "ambient_dim"),
        ("n", "trials", "box"),
    )
    profile = family_from_json(obj["family"])
    if profile is None:
        raise SchemaError("classification needs a radial family, not plane_wave")
    measure = measure_from_json(obj["measure"])
    m = _int_field(obj["ambient_dim"], "ambient_dim")
    rep = classify_and_report(
        measure,
        profile,
        m,
        n=_int_field(obj.get("n", 4), "n"),
        trials=_int_field(obj.get("trials", 20), "trials"),
        seed=args.seed,
        box=_float_field(obj.get("box", 2.0), "box"),
        tol=args.tols["psd"],
        probe_tol=args.tols["probe"],
    )
    cls = rep.classification
    result = {
        "verdict": cls.verdict,
        "min_eigenvalue": float(cls.min_eigenvalue),
        "witness": None if cls.witness is None else _cvec_json(cls.witness),
        "family_kind": cls.family_kind,
        "dim": cls.dim,
        "jet_order": rep.jet_order,
        "consistent": rep.consistent,
        "probe": _probe_json(rep.probe),
        "witness_design": None
        if rep.witness_design is None
        else {"min_eigenvalue": rep.witness_design[0], "scale": rep.witness_design[1]},
        "notes": list(rep.notes),
    }
    _emit(args, _report(args, "classify", obj, result))
    return EXIT_OK if cls.verdict == "StrictlyPD_and_Universal" else EXIT_NEGATIVE


def _parse_w(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")], dtype=float)
    except ValueError as exc:
        raise SchemaError(f"--w wants comma-separated numbers, got '{text}'") from exc


def cmd_demo(args) -> int:
    if args.which == "shifted-gaussian":
        w = _parse_w(args.w)
        r = demo_counterexample_shifted_gaussian(w, seed=args.seed)
        ok = abs(r.mixed_form) <= DEMO_MIXED_TOL and r.projection_floor > PROJECTION_FLOOR_TOL
        descriptor = {"which": args.which, "w": [float(c) for c in w]}
        result = {
            "mixed_form": r.mixed_form,
            "projection_floor": r.projection_floor,
            "params": r.params,
            "reproduced": ok,
            "criteria": {
                "mixed_form_tol": DEMO_MIXED_TOL,
                "projection_floor_tol": PROJECTION_FLOOR_TOL,
            },
        }
    else:
        r = demo_counterexample_radial_bump(grid_n=args.grid_n, box=args.box, m=args.m)
        ref_floor = DEMO_REFERENCE_FLOOR * r.params["reference_scale"]
        ok = r.relative_form <= DEMO_RELATIVE_TOL and r.reference_form > ref_floor
        descriptor = {
            "which": args.which,
            "grid_n": args.grid_n,
            "box": args.box,
            "m": args.m,
        }
        result = {
            "mixed_form": r.mixed_form,
            "reference_form": r.reference_form,
            "relative_form": r.relative_form,
            "params": r.params,
            "reproduced": ok,
            "criteria": {
                "relative_form_tol": DEMO_RELATIVE_TOL,
                "reference_floor": ref_floor,
            },
        }
    _emit(args, _report(args, "demo", descriptor, result))
    return EXIT_OK if ok else EXIT_NEGATIVE


def _sin_cos_experiment(args) -> dict:
    """Interpolate (sin, cos) with the gaussian identity-measure kernel on
    [-1, 1] and report sup-grid errors for n = 5 and n = 20 centers."""
    measure = measure_from_json(
        {"dim": 2, "atoms": [{"omega": 1.0, "G": {"re": [[1.0, 0.0], [0.0, 1.0]]}}]}
    )
    kernel = radial_kernel(RadialProfile.gaussian(), measure, 1)
    grid = np.linspace(-1.0, 1.0, 201)
    errors = {}
    residuals = {}
    ridges = {}
    for n in (5, 20):
        centers = np.linspace(-1.0, 1.0, n).reshape(n, 1)
        targets = np.stack([np.sin(centers[:, 0]), np.cos(centers[:, 0])], axis=1)
        res = interpolate(kernel, centers, targets, ridge=args.tols["ridge"])
        worst = 0.0
        for y in grid:
            val = rkhs_eval(res.element, np.array([y]))
            worst = max(
                worst,
                abs(val[0].real - np.sin(y)),
                abs(val[1].real - np.cos(y)),
            )
        errors[str(n)] = worst
        residuals[str(n)] = res.residual
        ridges[str(n)] = res.ridge
    return {
        "experiment": "sin-cos",
        "sup_errors": errors,
        "error_ratio_5_to_20": errors["5"] / errors["20"],
        "residuals": residuals,
        "ridges": ridges,
        "eval_grid": {"start": -1.0, "stop": 1.0, "num": 201},
    }


def cmd_interp(args) -> int:
    obj = _load_input(args)
    if isinstance(obj, dict) and "experiment" in obj:
        _fields(obj, "interp input", ("experiment",))
        if obj["experiment"] != "sin-cos":
            raise SchemaError(f"unknown experiment '{obj['experiment']}'")
        _emit(args, _report(args, "interp", obj, _sin_cos_experiment(args)))
        return EXIT_OK
    if isinstance(obj, dict) and "data" in obj:
        _fields(obj, "interp input", ("kernel", "data"), ("ridge",))
        kernel = kernel_from_json(obj["kernel"])
        data = []
        for i, datum in enumerate(obj["data"]):
            _fields(datum, f"datum {i}", ("x", "alpha", "target"))
            x = _point_field(datum["x"], f"datum {i} 'x'", kernel.m)
            try:
                alpha = tuple(int(a) for a in datum["alpha"])
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"bad 'alpha' in datum {i}") from exc
            tgt = _cvec_from_json(datum["target"], f"datum {i} 'target'")
            data.append((x, alpha, tgt))
        ridge = args.tols["ridge"]
        if ridge is None and "ridge" in obj:
            ridge = _float_field(obj["ridge"], "ridge")
        res = hermite_interpolate(kernel, data, ridge=ridge)
    else:
        _fields(obj, "interp input", ("kernel", "points", "targets"), ("ridge",))
        kernel = kernel_from_json(obj["kernel"])
        pts = _points_field(obj["points"], "points", kernel.m)
        targets = _cvec_from_json(obj["targets"], "'targets'")
        if targets.shape != (pts.shape[0], kernel.ell):
            raise SchemaError(
                f"'targets' must be {pts.shape[0]} x {kernel.ell} (re/im matrices)"
            )
        ridge = args.tols["ridge"]
        if ridge is None and "ridge" in obj:
            ridge = _float_field(obj["ridge"], "ridge")
        res = interpolate(kernel, pts, targets, ridge=ridge)
    result = {
        "residual": res.residual,
        "ridge": res.ridge,
        "coefficients": [
            {"alpha": list(alpha), "x": [float(c) for c in x], "v": _cvec_json(v)}
            for alpha, x, v in res.element.atoms
        ],
    }
    _emit(args, _report(args, "interp", obj, result))
    return EXIT_OK


_NAMED_FUNCTIONS = {
    "exp-neg": lambda t: np.exp(-t),
    "inv-1p": lambda t: 1.0 / (1.0 + t),
    "two-plus-sin": lambda t: 2.0 + np.sin(t),
}


def cmd_monotone(args) -> int:
    obj = _load_input(args)
    _fields(
        obj,
        "monotone input",
        ("function", "mode"),
        ("grid", "nmax", "h", "ell"),
    )
    spec = obj["function"]
    ell_from_fn = None
    if isinstance(spec, str):
        if spec not in _NAMED_FUNCTIONS:
            raise SchemaError(
                f"unknown function '{spec}' (known: {sorted(_NAMED_FUNCTIONS)})"
            )
        fn = _NAMED_FUNCTIONS[spec]
    else:
        _fields(spec, "'function'", ("williamson",))
        w = spec["williamson"]
        _fields(w, "williamson descriptor", ("atoms", "ell"))
        ell_from_fn = _int_field(w["ell"], "ell")
        if not isinstance(w["atoms"], list) or not w["atoms"]:
            raise SchemaError("williamson 'atoms' must be a nonempty list")
        atoms = []
        for i, pair in enumerate(w["atoms"]):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"williamson atom {i} must be a [r, lambda] pair")
            atoms.append((_float_field(pair[0], "r"), _float_field(pair[1], "lambda")))
        fn = williamson_construct(atoms, ell_from_fn)

    grid_spec = obj.get("grid", {"start": 0.5, "stop": 5.0, "num": 10})
    _fields(grid_spec, "'grid'", ("start", "stop", "num"))
    grid = np.linspace(
        _float_field(grid_spec["start"], "start"),
        _float_field(grid_spec["stop"], "stop"),
        _int_field(grid_spec["num"], "num"),
    )
    h = _float_field(obj.get("h", CM_DEFAULT_H), "h")

    mode = obj["mode"]
    if mode == "cm":
        nmax = _int_field(obj.get("nmax", 6), "nmax")
        res = completely_monotone_check(fn, grid, nmax=nmax, h=h)
        result = {
            "mode": "cm",
            "ok": res.ok,
            "violation": None
            if res.violation is None
            else {"n": res.violation[0], "t": res.violation[1]},
            "tolerance": res.tolerance,
            "nmax": nmax,
        }
        ok = res.ok
    elif mode == "ell-cm":
        ell = obj.get("ell", ell_from_fn)
        if ell is None:
            raise SchemaError("mode 'ell-cm' needs an 'ell' field")
        ell = _int_field(ell, "ell")
        res = ell_cm_check(fn, ell, grid, h=h)
        result = {
            "mode": "ell-cm",
            "ok": res.ok,
            "failed_checks": list(res.failed_checks),
            "tolerance": res.tolerance,
            "notes": res.notes,
            "ell": ell,
        }
        ok = res.ok
    else:
        raise SchemaError(f"unknown mode '{mode}' (want 'cm' or 'ell-cm')")
    result["grid"] = {
        "start": float(grid[0]),
        "stop": float(grid[-1]),
        "num": int(grid.size),
    }
    result["h"] = h
    _emit(args, _report(args, "monotone", obj, result))
    return EXIT_OK if ok else EXIT_NEGATIVE


def _probe_json(rep) -> dict:
    out = {
        "verdict": rep.verdict,
        "trials": rep.trials,
        "n": rep.n,
        "box": rep.box,
        "seed": rep.seed,
        "tol": rep.tol,
        "min_eigenvalues": [float(v) for v in rep.min_eigenvalues],
        "global_min": rep.global_min,
        "violation": None,
    }
    if rep.violation is not None:
        out["violation"] = {
            "trial": rep.violation.trial,
            "points": [[float(c) for c in p] for p in rep.violation.points],
            "min_eigenvalue": rep.violation.min_eigenvalue,
            "witness": _cvec_json(rep.violation.witness),
        }
    return out


def cmd_probe(args) -> int:
    obj = _load_input(args)
    _fields(obj, "probe input", ("kernel",), ("n", "trials", "box"))
    kernel = kernel_from_json(obj["kernel"])
    rep = probe_strict_pd(
        kernel,
        n=_int_field(obj.get("n", 4), "n"),
        trials=_int_field(obj.get("trials", 20), "trials"),
        seed=args.seed,
        box=_float_field(obj.get("box", 2.0), "box"),
        tol=args.tols["probe"],
        jobs=args.jobs,
    )
    _emit(args, _report(args, "probe", obj, _probe_json(rep)))
    return EXIT_OK if rep.verdict == "NoViolationFound" else EXIT_NEGATIVE


# ----------------------------------------------------------------------
# parser / dispatch
# ----------------------------------------------------------------------


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="JSON descriptor file")
    common.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--seed", type=_nonneg_int, default=0, help="seed for randomized steps (default 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format (csv applies to gram matrices)")
    common.add_argument("--jobs", type=_pos_int, default=1, help="worker threads for probe trials")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp (for byte-identical reruns)")
    common.add_argument(
        "--tol",
        action="append",
        metavar="NAME=VALUE",
        help=f"override a tolerance; names: {sorted(_TOL_DEFAULTS)}",
    )

    parser = argparse.ArgumentParser(
        prog="opkernel",
        description="operator-valued positive definite kernels: evaluation, "
        "Grams, classification, probes, counterexample demos",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a kernel block at (x, y) or radial t")
    p.set_defaults(func=cmd_eval)
    p = sub.add_parser("gram", parents=[common], help="block Gram matrix at a point design")
    p.set_defaults(func=cmd_gram)
    p = sub.add_parser("deriv-gram", parents=[common], help="derivative block Gram at jet order q")
    p.set_defaults(func=cmd_deriv_gram)
    p = sub.add_parser("classify", parents=[common], help="exact strictness classification plus probe")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("demo", parents=[common], help="reproduce a counterexample")
    p.add_argument("which", choices=("shifted-gaussian", "radial-bump"))
    p.add_argument("--w", default="1", help="shift vector, comma-separated (shifted-gaussian)")
    p.add_argument("--grid-n", type=int, default=512, help="grid size (radial-bump)")
    p.add_argument("--box", type=float, default=4.0, help="half-width of the spatial grid (radial-bump)")
    p.add_argument("--m", type=int, default=1, help="ambient dimension (radial-bump; only 1 is implemented)")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("interp", parents=[common], help="kernel interpolation / the sin-cos experiment")
    p.set_defaults(func=cmd_interp)
    p = sub.add_parser("monotone", parents=[common], help="complete/multiple monotonicity checks")
    p.set_defaults(func=cmd_monotone)
    p = sub.add_parser("probe", parents=[common], help="random-design strictness probe")
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.tols = _parse_tols(args.tol)
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
