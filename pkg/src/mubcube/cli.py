"""``mubcube`` command-line entry point.

Exit codes: 0 success, 1 verification failed, 2 usage error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cube as cb
from . import families as fam
from . import invariants as inv
from . import search as sr
from .errors import MubCubeError, NotEquivalent
from .fixtures import dumps, write_fixtures
from .hadamard import adjoint_equivalent, dephase, equivalent, haagerup, validate_hadamard
from .mub import (
    MubSystem,
    directly_equivalent_pairs,
    directly_equivalent_triplets,
    mub_residuals,
    permutationally_equivalent_pairs,
    transition,
    validate_mub,
)
from .numerics import EXACT_TOL, SEARCH_TOL, Tolerance, matrix_from_json, matrix_to_json

OK, FAILED, USAGE, INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Verification(Exception):
    """Carries a report for a failed verification (exit code 1)."""

    def __init__(self, report: dict):
        self.report = report
        super().__init__("verification failed")


# ---- input helpers ----


def _load(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _matrix(path: str) -> np.ndarray:
    return matrix_from_json(_load(path))


def _triplet_obj(obj: dict) -> dict:
    # accept a search outcome as well as a bare triplet
    if "triplet" in obj and isinstance(obj["triplet"], dict):
        return obj["triplet"]
    if obj.get("triplet", 0) is None:
        raise UsageError("search outcome holds no triplet (run did not converge)")
    if obj.get("kind") == "zauner_pair":
        s = np.sqrt(6)
        bases = [np.eye(6), matrix_from_json(obj["F1"]) / s, matrix_from_json(obj["F2"]) / s]
        return {"bases": [matrix_to_json(b) for b in bases]}
    return obj


def _triplet(path: str, tol: float) -> MubSystem:
    obj = _triplet_obj(_load(path))
    if "bases" not in obj:
        raise UsageError(f"{path} does not contain a triplet")
    return validate_mub([matrix_from_json(b) for b in obj["bases"]], tol)


def _cube(path: str) -> cb.HadamardCube:
    obj = _load(path)
    try:
        return cb.HadamardCube.from_json(obj)
    except KeyError:
        raise UsageError(f"{path} does not contain a cube") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _complex(text: str) -> complex:
    tokens = {"w": fam.OMEGA, "w2": fam.OMEGA**2, "-w": -fam.OMEGA, "-w2": -fam.OMEGA**2}
    if text in tokens:
        return complex(tokens[text])
    if text.startswith("turns:"):
        return complex(np.exp(2j * np.pi * float(text[6:])))
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r} (use e.g. 1, -1, 0.6+0.8j, w, turns:0.25)") from None


def _vector(text: str) -> np.ndarray:
    return np.array([_complex(t) for t in text.split(",")])


# ---- commands ----


def cmd_hadamard(a) -> dict:
    m = _matrix(a.file)
    if a.action == "validate":
        h = validate_hadamard(m, a.tol)
        return {"valid": True, "dim": h.dim}
    if a.action == "haagerup":
        g = haagerup(m)
        return {"dim": m.shape[0], "shape": list(g.shape), "re": g.real.tolist(), "im": g.imag.tolist()}
    if a.action == "dephase":
        return matrix_to_json(dephase(m, a.row, a.col))
    if a.action == "equiv":
        if a.other is None:
            raise UsageError("equiv needs a second matrix file")
        other = _matrix(a.other)
        w = (adjoint_equivalent if a.adjoint else equivalent)(m, other, a.tol)
        out = {"equivalent": w is not None, "witness": None if w is None else w.to_json()}
        if w is None:
            raise Verification(out)
        return out
    raise UsageError(f"unknown hadamard action {a.action}")


def cmd_mub(a) -> dict:
    t = _triplet(a.file, a.tol)
    if a.action == "validate":
        res = mub_residuals(t.bases)
        return {
            "valid": True,
            "dim": t.dim,
            "bases": len(t),
            "unitarity": res["unitarity"],
            "unbiasedness": {f"{i},{j}": v for (i, j), v in res["unbiasedness"].items()},
        }
    if a.action == "transition":
        i, j = _ints(a.pair)
        return {"kind": "hadamard", **matrix_to_json(transition(t[i], t[j], a.tol).entries), "tol": a.tol}
    if a.other is None:
        raise UsageError(f"{a.action} needs a second file")
    other = _triplet(a.other, a.tol)
    if a.action == "equiv-pair":
        p1, p2 = (t[0], t[1]), (other[0], other[1])
        if a.permutational:
            w = permutationally_equivalent_pairs(p1, p2, a.tol)
            out = {"equivalent": w is not None, "witness": None if w is None else w.to_json()}
        else:
            try:
                u = directly_equivalent_pairs(p1, p2, a.tol)
                out = {"equivalent": True, "unitary": matrix_to_json(u)}
            except NotEquivalent as exc:
                out = {"equivalent": False, "reason": str(exc)}
        if not out["equivalent"]:
            raise Verification(out)
        return out
    if a.action == "equiv-triplet":
        same = directly_equivalent_triplets(t, other, a.tol)
        if not same:
            raise Verification({"directly_equivalent": False})
        return {"directly_equivalent": True}
    raise UsageError(f"unknown mub action {a.action}")


def cmd_cube(a) -> dict:
    if a.action == "build":
        return {"kind": "cube", **cb.build_cube(_triplet(a.file, a.tol)).to_json()}
    c = _cube(a.file)
    check = {"verify": cb.verify_axioms, "verify-weak": cb.verify_weak_conditions, "verify-io": cb.verify_inverse_orthogonal}
    if a.action in check:
        report = check[a.action](c, a.tol).to_json()
        if not report["passed"]:
            raise Verification(report)
        return report
    if a.action == "reconstruct":
        return {"kind": "triplet", **cb.reconstruct_triplet(c, a.tol).to_json()}
    if a.action == "classify":
        return cb.classify(c, a.search_tol).to_json()
    raise UsageError(f"unknown cube action {a.action}")


def _turns(text: str) -> complex:
    try:
        t = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected a number of turns such as 0.25 or 1/3, got {text!r}") from None
    return complex(np.exp(2j * np.pi * t))


def cmd_family(a) -> dict:
    if a.action in ("fourier", "fourier-t"):
        make = fam.fourier_transposed if a.action == "fourier-t" else fam.fourier
        return make(_turns(a.x), _turns(a.y)).to_json()
    if a.action == "exceptional":
        return fam.exceptional_reference(a.tol).to_json()
    if a.file is None:
        raise UsageError(f"family {a.action} needs an input file")
    if a.action == "zauner-build":
        obj = _load(a.file)
        try:
            f1, f2 = matrix_from_json(obj["F1"]), matrix_from_json(obj["F2"])
        except KeyError:
            raise UsageError(f"{a.file} needs fields F1 and F2") from None
        z = fam.zauner_triplet(f1, f2, a.tol)
        return {"kind": "triplet", **z.triplet.to_json(), "szollosi_form": z.szollosi_form, "szollosi_equivalent": z.szollosi_equivalent}
    m = _matrix(a.file)
    if a.action == "szollosi-check":
        form = fam.detect_szollosi_form(m, a.tol)
        match = fam.in_family(m, "szollosi", a.tol)
        out = {"szollosi_form": form, "szollosi_equivalent": match is not None, "match": None if match is None else match.__dict__}
    elif a.action == "two-circulant-check":
        blocks = fam.detect_two_circulant(m, a.tol)
        out = {"two_circulant": blocks is not None}
        if blocks is not None:
            rows = {k: getattr(blocks, k)[0] for k in "ABCD"}
            out["first_rows"] = {k: {"re": r.real.tolist(), "im": r.imag.tolist()} for k, r in rows.items()}
    elif a.action == "member":
        match = fam.in_family(m, a.family, a.tol)
        out = {"family": a.family, "member": match is not None, "match": None if match is None else match.__dict__}
    elif a.action == "labels":
        return {"labels": sorted(fam.family_labels(m, a.tol))}
    else:
        raise UsageError(f"unknown family action {a.action}")
    if not any(v is True for k, v in out.items() if k in ("szollosi_form", "szollosi_equivalent", "two_circulant", "member")):
        raise Verification(out)
    return out


def cmd_inv(a) -> dict:
    if a.action in ("g", "G", "tildeG"):
        m = _matrix(a.file)
        gamma = _ints(a.gamma)
        if a.action == "g":
            v = inv.g_of(m, gamma)
            return {"gamma": gamma, "re": v.real, "im": v.imag}
        f = inv.G_of if a.action == "G" else inv.tilde_G
        return {"gamma": gamma, "value": f(m, gamma)}
    if a.action == "conjecture":
        t = _triplet(a.file, a.tol)
        return inv.conjecture_terms(*[h.entries for h in t.transitions()])
    if a.action == "binary":
        if a.vector is None:
            raise UsageError("binary needs --vector")
        v = _vector(a.vector)
        return {"binary": inv.is_binary(v, a.tol), "power_sum": inv.is_binary_power_sum(v, a.tol)}
    if a.action == "ibinary":
        m = _matrix(a.file)
        subsets = [tuple(_ints(a.subset))] if a.subset else list(inv.ALL_SUBSETS)
        return {"results": [{"subset": list(s), "binary": inv.is_I_binary(m, s, a.tol)} for s in subsets]}
    if a.action == "minus-one-rows":
        return {"rows": sorted(inv.minus_one_rows(_matrix(a.file), a.row, a.col, a.tol))}
    raise UsageError(f"unknown inv action {a.action}")


def _config(a) -> sr.SearchConfig:
    obj = _load(a.config) if a.config else {}
    obj.setdefault("search_tol", a.search_tol)
    return sr.SearchConfig.from_json(obj)


def cmd_search(a) -> dict | str:
    cfg = _config(a)
    if a.action == "run":
        return sr.optimize(a.seed, cfg).to_json()
    if a.action == "experiment":
        report = sr.experiment(a.runs, cfg, a.jobs, a.master_seed)
        return report.to_csv() if a.format == "csv" else report.to_json()
    raise UsageError(f"unknown search action {a.action}")


def pipeline(source, tol: float, search_tol: float) -> tuple[dict, bool]:
    """Full verification chain on a triplet or cube; returns (report, passed)."""
    report: dict = {}
    triplet = None
    if isinstance(source, MubSystem):
        triplet = source
        report["triplet"] = {"dim": triplet.dim, "residuals": {"unitarity": mub_residuals(triplet.bases)["unitarity"]}}
        c = cb.build_cube(triplet)
    else:
        c = source
    d = c.dim
    checks = {
        "axioms": cb.verify_axioms(c, tol),
        "weak_conditions": cb.verify_weak_conditions(c, tol),
    }
    try:
        checks["inverse_orthogonal"] = cb.verify_inverse_orthogonal(c, tol)
    except MubCubeError as exc:
        report["inverse_orthogonal_error"] = str(exc)
    report["checks"] = {k: v.to_json() for k, v in checks.items()}
    passed = all(v.passed for v in checks.values()) and "inverse_orthogonal_error" not in report
    try:
        rec = cb.reconstruct_triplet(c, tol)
        mismatch = float(np.max(np.abs(cb.build_cube(rec).entries - c.entries)))
        report["reconstruction"] = {"round_trip_residual": mismatch}
        if triplet is not None:
            report["reconstruction"]["directly_equivalent"] = directly_equivalent_triplets(rec, triplet, tol)
            passed &= report["reconstruction"]["directly_equivalent"]
        triplet = triplet or rec
    except MubCubeError as exc:
        report["reconstruction"] = {"error": str(exc)}
        passed = False
    if d != 6:
        report["classification"] = "not-applicable"
        report["conjecture"] = "not-applicable"
        report["families"] = "not-applicable"
        return report, bool(passed)
    report["classification"] = cb.classify(c, search_tol).to_json()
    if triplet is not None:
        hs = [h.entries for h in triplet.transitions()]
        report["conjecture"] = inv.conjecture_terms(*hs)
        htol = np.sqrt(6) * tol
        report["families"] = {
            "roles": fam.zauner_roles(hs, htol),
            "minus_one_rows": [sorted(inv.minus_one_rows(h, tol=4 * htol)) for h in hs],
            "two_circulant": [fam.detect_two_circulant(h, htol) is not None for h in hs],
        }
    return report, bool(passed)


def cmd_pipeline(a) -> dict:
    if a.search_seed is not None:
        outcome = sr.optimize(a.search_seed, _config(a))
        if not outcome.converged:
            raise Verification({"search": outcome.summary(), "error": "search did not converge"})
        source, tol = outcome.triplet, a.search_tol
    elif a.file is not None:
        obj = _load(a.file)
        tol = a.tol
        if isinstance(obj.get("re"), list) and np.ndim(obj["re"]) == 3:
            source = _cube(a.file)
        else:
            obj = _triplet_obj(obj)
            tol = obj.get("tol", a.tol) if a.tol_from_input else a.tol
            source = validate_mub([matrix_from_json(b) for b in obj["bases"]], tol)
    else:
        raise UsageError("pipeline needs an input file or --search-seed")
    report, passed = pipeline(source, tol, a.search_tol)
    report["tol"] = tol
    if not passed:
        raise Verification(report)
    return report


def cmd_fixtures(a) -> dict:
    out = a.out_dir or a.out
    if out is None:
        raise UsageError("fixtures needs an output directory (--out DIR)")
    try:
        paths = write_fixtures(out)
    except OSError as exc:
        raise RuntimeError(f"could not write fixtures: {exc}") from exc
    return {"written": [str(p) for p in paths]}


# ---- argument parsing ----


COMMON_DEFAULTS = {"tol": EXACT_TOL, "search_tol": SEARCH_TOL, "seed": 0, "out": None, "format": "json"}


def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommands suppress their defaults so flags given before the subcommand survive
    def default(name):
        return argparse.SUPPRESS if suppress else COMMON_DEFAULTS[name]

    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=default("tol"), help="tolerance for analytic objects")
    p.add_argument("--search-tol", type=float, default=default("search_tol"), help="tolerance for optimizer outputs")
    p.add_argument("--seed", type=int, default=default("seed"))
    p.add_argument("--out", default=default("out"), help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=default("format"))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common(True)
    parser = argparse.ArgumentParser(prog="mubcube", description="Hadamard cubes and MUB-triplets", parents=[_common(False)])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hadamard", parents=[common], help="validate, dephase, compare Hadamard matrices")
    p.add_argument("action", choices=("validate", "haagerup", "dephase", "equiv"))
    p.add_argument("file")
    p.add_argument("other", nargs="?")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--col", type=int, default=0)
    p.add_argument("--adjoint", action="store_true", help="also allow the adjoint of the second matrix")
    p.set_defaults(func=cmd_hadamard)

    p = sub.add_parser("mub", parents=[common], help="validate triplets and compare them")
    p.add_argument("action", choices=("validate", "transition", "equiv-pair", "equiv-triplet"))
    p.add_argument("file")
    p.add_argument("other", nargs="?")
    p.add_argument("--pair", default="0,1", help="basis indices for transition")
    p.add_argument("--permutational", action="store_true", help="equiv-pair up to permutations")
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("cube", parents=[common], help="build, verify, reconstruct, classify cubes")
    p.add_argument("action", choices=("build", "verify", "verify-weak", "verify-io", "reconstruct", "classify"))
    p.add_argument("file")
    p.set_defaults(func=cmd_cube)

    p = sub.add_parser("family", parents=[common], help="structured d=6 families")
    p.add_argument(
        "action",
        choices=("fourier", "fourier-t", "szollosi-check", "two-circulant-check", "zauner-build", "exceptional", "member", "labels"),
    )
    p.add_argument("file", nargs="?")
    p.add_argument("--x", default="0", help="x = exp(2 pi i * turns)")
    p.add_argument("--y", default="0", help="y = exp(2 pi i * turns)")
    p.add_argument("--family", choices=sorted(fam.FAMILIES), default="szollosi")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("inv", parents=[common], help="power-sum invariants and binary vectors")
    p.add_argument("action", choices=("g", "G", "tildeG", "conjecture", "binary", "ibinary", "minus-one-rows"))
    p.add_argument("file", nargs="?")
    p.add_argument("--gamma", default=",".join(map(str, inv.GAMMA1)))
    p.add_argument("--vector", help="comma-separated complex entries")
    p.add_argument("--subset", help="comma-separated 3-subset of 0..5")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--col", type=int, default=0)
    p.set_defaults(func=cmd_inv)

    p = sub.add_parser("search", parents=[common], help="numerical search for d=6 triplets")
    p.add_argument("action", choices=("run", "experiment"))
    p.add_argument("--config", help="SearchConfig JSON file")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: $MUBCUBE_JOBS or 1)")
    p.add_argument("--master-seed", type=int, default=0)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("pipeline", parents=[common], help="full verification chain")
    p.add_argument("file", nargs="?", help="triplet, search outcome or cube JSON")
    p.add_argument("--search-seed", type=int, default=None)
    p.add_argument("--config", help="SearchConfig JSON file (with --search-seed)")
    p.add_argument("--tol-from-input", action="store_true", help="use the tolerance recorded in the triplet file")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("fixtures", parents=[common], help="write the canonical fixture set")
    p.add_argument("out_dir", nargs="?")
    p.set_defaults(func=cmd_fixtures)
    return parser


def _flatten(obj, prefix="") -> list:
    if isinstance(obj, dict):
        rows = []
        for k, v in obj.items():
            rows += _flatten(v, f"{prefix}{k}.")
        return rows
    if isinstance(obj, (list, tuple)) and any(isinstance(v, (dict, list, tuple)) for v in obj):
        rows = []
        for i, v in enumerate(obj):
            rows += _flatten(v, f"{prefix}{i}.")
        return rows
    return [(prefix.rstrip("."), json.dumps(obj) if isinstance(obj, (list, tuple)) else obj)]


def render(payload, fmt: str) -> str:
    if isinstance(payload, str):
        return payload
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("key", "value"))
        w.writerows(_flatten(payload))
        return buf.getvalue()
    return dumps(payload)


def _emit(payload, a) -> None:
    text = render(payload, a.format)
    out = None if a.command == "fixtures" else a.out
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        Tolerance(a.tol, a.search_tol)
    except ValueError as exc:
        print(f"mubcube: {exc}", file=sys.stderr)
        return USAGE
    try:
        payload = a.func(a)
        _emit(payload, a)
        return OK
    except UsageError as exc:
        print(f"mubcube: {exc}", file=sys.stderr)
        return USAGE
    except Verification as exc:
        _emit(exc.report, a)
        return FAILED
    except MubCubeError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, a)
        return FAILED
    except Exception as exc:  # noqa: BLE001
        print(f"mubcube: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
