"""Canonical fixture set: small standard triplets, family members and a frozen Zauner pair."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .cube import build_cube
from .errors import MubCubeError
from .families import OMEGA, exceptional_reference, fourier_transposed, zauner_triplet
from .hadamard import equivalent
from .mub import MubSystem, validate_mub
from .numerics import matrix_from_json, matrix_to_json

ZAUNER_SEED = 0


def standard_triplet(d: int) -> MubSystem:
    """The standard MUB-triplet for d = 2 or d = 3."""
    if d == 2:
        f = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        g = np.array([[1, 1], [1j, -1j]]) / np.sqrt(2)
    elif d == 3:
        f = OMEGA ** np.outer(np.arange(3), np.arange(3)) / np.sqrt(3)
        g = np.diag([1, OMEGA, OMEGA]) @ f
    else:
        raise MubCubeError(f"standard triplets are provided for d = 2 and 3, not {d}")
    return validate_mub([np.eye(d), f, g])


def generate_zauner_pair(seed: int = ZAUNER_SEED) -> tuple[np.ndarray, np.ndarray]:
    """Search, polish and rotate a generic triplet into ``(F1, F2)`` form."""
    from .search import optimize, zauner_pair_from_triplet

    outcome = optimize(seed)
    if not outcome.converged or outcome.roles is None:
        raise MubCubeError(f"seed {seed} does not give a triplet with a role assignment")
    return zauner_pair_from_triplet(outcome.triplet, outcome.roles)


def zauner_pair() -> tuple[np.ndarray, np.ndarray]:
    """The frozen regression pair shipped with the package."""
    obj = json.loads(resources.files("mubcube").joinpath("data/zauner_pair.json").read_text())
    return matrix_from_json(obj["F1"]), matrix_from_json(obj["F2"])


def zauner_pair_json(f1, f2, seed: int = ZAUNER_SEED) -> dict:
    return {"kind": "zauner_pair", "seed": seed, "F1": matrix_to_json(f1), "F2": matrix_to_json(f2)}


def fixture_set() -> dict:
    """File name -> (JSON payload, provenance tag, description)."""
    out = {}
    for d in (2, 3):
        t = standard_triplet(d)
        out[f"triplet_d{d}.json"] = ({"kind": "triplet", **t.to_json()}, "analytic", f"standard MUB-triplet, d={d}")
        out[f"cube_d{d}.json"] = ({"kind": "cube", **build_cube(t).to_json()}, "analytic", f"Hadamard cube of the d={d} triplet")
    out["hadamard_FT_1_1.json"] = (fourier_transposed(1, 1).to_json(), "analytic", "F^T(1,1)")
    out["hadamard_FT_w_w.json"] = (fourier_transposed(OMEGA, OMEGA).to_json(), "analytic", "F^T(w,w), w = exp(2 pi i/3)")
    out["exceptional_reference.json"] = (exceptional_reference().to_json(), "analytic", "2-circulant A=B=C=circ(w,1,1), D=-A")
    w = equivalent(fourier_transposed(1, 1), fourier_transposed(-1, 1))
    out["equivalence_FT_1_1_vs_FT_m1_1.json"] = (
        {"kind": "equivalence", "equivalent": w is not None, "witness": None if w is None else w.to_json()},
        "exhaustive-search",
        "F^T(1,1) versus F^T(-1,1)",
    )
    f1, f2 = zauner_pair()
    zauner_triplet(f1, f2)
    out["zauner_pair.json"] = (zauner_pair_json(f1, f2), f"search-seed-{ZAUNER_SEED}", "regression (F1, F2) Zauner pair")
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def write_fixtures(out_dir) -> list[Path]:
    """Write every fixture plus ``manifest.json``; output is deterministic."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {}
    written = []
    for name, (payload, provenance, desc) in fixture_set().items():
        path = out_dir / name
        path.write_text(dumps(payload))
        manifest[name] = {"provenance": provenance, "description": desc}
        written.append(path)
    path = out_dir / "manifest.json"
    path.write_text(dumps(manifest))
    written.append(path)
    return written
