"""Gradient search for d = 6 MUB-triplets and the random-restart experiment harness.

The loss is the unweighted sum of an orthogonality term and an unbiasedness
term over three candidate bases. The optimizer moves all complex entries
freely and starts from random unimodular matrices scaled by ``1/sqrt(6)``.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .cube import build_cube, classify, verify_axioms
from .errors import MubCubeError
from .families import detect_szollosi_form, detect_two_circulant, zauner_roles
from .invariants import GAMMA1, conjecture_terms, minus_one_rows
from .mub import MubSystem, mub_residuals, validate_mub
from .numerics import SEARCH_TOL, dagger, matrix_from_json

D = 6
PAIRS = ((0, 1), (0, 2), (1, 2))
S = 1 / np.sqrt(D)


def _stack(xs) -> np.ndarray:
    x = np.asarray(xs, dtype=np.complex128)
    if x.shape != (3, D, D):
        raise MubCubeError(f"expected three {D}x{D} matrices, got shape {x.shape}")
    return x


def loss_terms(x1, x2, x3) -> tuple[float, float]:
    """Orthogonality and unbiasedness terms of the loss."""
    xs = _stack([x1, x2, x3])
    eye = np.eye(D)
    orth = sum(float(np.sum(np.abs(dagger(x) @ x - eye) ** 2)) for x in xs)
    unb = sum(float(np.sum((np.abs(dagger(xs[i]) @ xs[j]) - S) ** 2)) for i, j in PAIRS)
    return orth, unb


def loss(x1, x2, x3) -> float:
    return sum(loss_terms(x1, x2, x3))


def loss_and_gradient(xs) -> tuple[float, np.ndarray]:
    """Loss and its gradient ``dL/dRe + i dL/dIm`` for every entry of the three bases."""
    xs = _stack(xs)
    eye = np.eye(D)
    total = 0.0
    grad = np.zeros_like(xs)
    for i in range(3):
        g = dagger(xs[i]) @ xs[i] - eye
        total += float(np.sum(np.abs(g) ** 2))
        grad[i] += 4 * xs[i] @ g
    for i, j in PAIRS:
        m = dagger(xs[i]) @ xs[j]
        a = np.abs(m)
        total += float(np.sum((a - S) ** 2))
        w = 2 * (a - S) * m / np.where(a > 0, a, 1)
        grad[j] += xs[i] @ w
        grad[i] += xs[j] @ dagger(w)
    return total, grad


def gradient(xs) -> np.ndarray:
    return loss_and_gradient(xs)[1]


@dataclass(frozen=True)
class PhasePoint:
    """Three 6x6 phase arrays; the bases are ``exp(i theta) / sqrt(6)`` entrywise."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.array(self.theta, dtype=float)
        if t.shape != (3, D, D):
            raise MubCubeError(f"phase point needs shape (3, {D}, {D}), got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise MubCubeError("phases must be finite")
        t.flags.writeable = False
        object.__setattr__(self, "theta", t)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "PhasePoint":
        return cls(rng.uniform(0, 2 * np.pi, (3, D, D)))

    def normalized(self) -> "PhasePoint":
        return PhasePoint(np.mod(self.theta, 2 * np.pi))

    def bases(self) -> np.ndarray:
        return np.exp(1j * self.theta) * S


def phase_loss(p: PhasePoint) -> float:
    return loss(*p.bases())


def phase_gradient(p: PhasePoint) -> np.ndarray:
    """Exact derivative of the loss with respect to every phase."""
    x = p.bases()
    _, g = loss_and_gradient(x)
    # dX/dtheta = iX, so dL/dtheta = Re(conj(g) * iX)
    return np.imag(g * np.conj(x))


@dataclass(frozen=True)
class SearchConfig:
    max_iters: int = 20000
    initial_step: float = 1.0
    shrink: float = 0.5
    grow: float = 2.0
    armijo: float = 1e-4
    line_search: bool = True
    decay: float = 1e-3
    momentum: float = 0.0
    loss_threshold: float = 1e-12
    stall_threshold: float = 1e-15
    stall_window: int = 500
    min_step: float = 1e-20
    polish_threshold: float = 1e-26
    polish_iters: int = 5000
    search_tol: float = SEARCH_TOL
    probe_families: bool = True

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                continue
            if f.name == "momentum":
                if not 0 <= v < 1:
                    raise MubCubeError("momentum must lie in [0, 1)")
            elif f.name == "shrink":
                if not 0 < v < 1:
                    raise MubCubeError("shrink must lie in (0, 1)")
            elif v <= 0:
                raise MubCubeError(f"{f.name} must be positive")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "SearchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise MubCubeError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)


def initial_point(seed: int) -> np.ndarray:
    return PhasePoint.random(np.random.default_rng(seed)).bases()


def descend(x: np.ndarray, cfg: SearchConfig) -> tuple[np.ndarray, float, int, str]:
    """Gradient descent from ``x``; returns (point, loss, iterations, status)."""
    value, g = loss_and_gradient(x)
    history = [value]
    step = cfg.initial_step
    velocity = np.zeros_like(x)
    for it in range(cfg.max_iters):
        if value < cfg.loss_threshold:
            return x, value, it, "converged"
        if it >= cfg.stall_window and history[-cfg.stall_window - 1] - value < cfg.stall_threshold:
            return x, value, it, "stuck"
        direction = cfg.momentum * velocity - g
        slope = float(np.real(np.vdot(g, direction)))
        if slope >= 0:
            direction, slope = -g, -float(np.real(np.vdot(g, g)))
        if cfg.line_search:
            while True:
                cand = x + step * direction
                new_value, new_g = loss_and_gradient(cand)
                if new_value <= value + cfg.armijo * step * slope:
                    break
                step *= cfg.shrink
                if step < cfg.min_step:
                    return x, value, it, "stuck"
        else:
            step = cfg.initial_step / (1 + cfg.decay * it)
            cand = x + step * direction
            new_value, new_g = loss_and_gradient(cand)
        velocity = cand - x
        x, value, g = cand, new_value, new_g
        history.append(value)
        if cfg.line_search:
            step *= cfg.grow
    status = "converged" if value < cfg.loss_threshold else "stuck"
    return x, value, cfg.max_iters, status


@dataclass
class SearchOutcome:
    seed: int
    status: str  # "converged" or "stuck"
    loss: float
    iterations: int
    polished_loss: float | None = None
    triplet: MubSystem | None = None
    classification: str | None = None
    axioms_passed: bool | None = None
    unbiasedness_residual: float | None = None
    piercing_residual: float | None = None
    conjecture: dict | None = None
    max_G_gamma1: float | None = None
    roles: tuple | None = None
    minus_one_rows: list | None = None
    two_circulant: list | None = None
    szollosi_form: list | None = None
    notes: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def conjecture_residual(self) -> float | None:
        return None if self.conjecture is None else self.conjecture["total"]

    def summary(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "triplet"}
        out["roles"] = None if self.roles is None else list(self.roles)
        out["conjecture_residual"] = self.conjecture_residual
        return out

    def to_json(self) -> dict:
        out = self.summary()
        out["triplet"] = None if self.triplet is None else self.triplet.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SearchOutcome":
        obj = dict(obj)
        obj.pop("conjecture_residual", None)
        t = obj.pop("triplet", None)
        if obj.get("roles") is not None:
            obj["roles"] = tuple(obj["roles"])
        out = cls(**obj)
        if t is not None:
            out.triplet = MubSystem([matrix_from_json(b) for b in t["bases"]], t.get("tol", SEARCH_TOL))
        return out


def _max_G_gamma1(transitions) -> float:
    from itertools import permutations

    from .invariants import G_of

    return max(G_of(h, p) for h in transitions for p in set(permutations(GAMMA1)))


def analyze(outcome: SearchOutcome, x: np.ndarray, cfg: SearchConfig) -> SearchOutcome:
    """Validate a converged point and attach cube, conjecture and family evidence."""
    tol = cfg.search_tol
    try:
        triplet = validate_mub(list(x), tol)
    except MubCubeError as exc:
        outcome.status = "stuck"
        outcome.notes.append(f"converged point failed validation: {exc}")
        return outcome
    outcome.triplet = triplet
    res = mub_residuals(triplet.bases)
    outcome.unbiasedness_residual = max(res["unbiasedness"].values())
    cube = build_cube(triplet)
    report = verify_axioms(cube, tol)
    outcome.axioms_passed = report.passed
    outcome.piercing_residual = report.checks["piercing_sums"].residual
    outcome.classification = classify(cube, tol).label
    hs = [h.entries for h in triplet.transitions()]
    outcome.conjecture = conjecture_terms(*hs)
    outcome.max_G_gamma1 = _max_G_gamma1(hs)
    htol = np.sqrt(D) * tol
    outcome.minus_one_rows = [sorted(minus_one_rows(h, tol=4 * htol)) for h in hs]
    outcome.two_circulant = [detect_two_circulant(h, htol) is not None for h in hs]
    outcome.szollosi_form = [detect_szollosi_form(h, htol) for h in hs]
    if cfg.probe_families:
        outcome.roles = zauner_roles(hs, htol)
    return outcome


def polish(x: np.ndarray, cfg: SearchConfig) -> tuple[np.ndarray, float]:
    """Keep descending from a converged point to push the loss to rounding level."""
    pcfg = replace(cfg, loss_threshold=cfg.polish_threshold, max_iters=cfg.polish_iters, stall_window=200, stall_threshold=1e-32)
    x, value, _, _ = descend(x, pcfg)
    return x, value


def optimize(seed: int, cfg: SearchConfig | None = None) -> SearchOutcome:
    """One random restart; a pure function of ``(seed, cfg)``.

    The status is decided by ``cfg.loss_threshold``; converged points are then
    polished before validation so downstream invariants see full precision.
    """
    cfg = cfg or SearchConfig()
    x, value, iters, status = descend(initial_point(seed), cfg)
    outcome = SearchOutcome(int(seed), status, float(value), int(iters))
    if status == "converged":
        x, outcome.polished_loss = polish(x, cfg)
        outcome = analyze(outcome, x, cfg)
    return outcome


def run_seed(master_seed: int, index: int) -> int:
    """Per-run seed derived from the master seed and the run index."""
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)[0])


def _run(args):
    seed, cfg = args
    return optimize(seed, cfg)


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("MUBCUBE_JOBS", "1")))
    except ValueError:
        raise MubCubeError("MUBCUBE_JOBS must be an integer") from None


@dataclass
class ExperimentReport:
    master_seed: int
    config: SearchConfig
    outcomes: list

    @property
    def runs(self) -> int:
        return len(self.outcomes)

    def count(self, label: str) -> int:
        if label == "stuck":
            return sum(not o.converged for o in self.outcomes)
        return sum(o.converged and o.classification == label for o in self.outcomes)

    def fraction(self, label: str) -> float:
        return self.count(label) / self.runs

    def converged(self) -> list:
        return [o for o in self.outcomes if o.converged]

    def residual_stats(self) -> dict:
        r = np.array([o.conjecture_residual for o in self.converged()], dtype=float)
        if r.size == 0:
            return {"max": None, "p50": None, "p99": None, "histogram": {}}
        edges = 10.0 ** np.arange(-20, 3)
        counts, _ = np.histogram(np.clip(r, edges[0], edges[-1]), bins=edges)
        return {
            "max": float(r.max()),
            "p50": float(np.percentile(r, 50)),
            "p99": float(np.percentile(r, 99)),
            "histogram": {f"{lo:.0e}": int(c) for lo, c in zip(edges[:-1], counts)},
        }

    def role_tally(self) -> dict:
        tally: dict = {}
        for o in self.converged():
            key = "none" if o.roles is None else ",".join(o.roles)
            tally[key] = tally.get(key, 0) + 1
        return dict(sorted(tally.items()))

    def to_json(self) -> dict:
        labels = ("stuck", "generic", "exceptional", "other")
        return {
            "runs": self.runs,
            "master_seed": self.master_seed,
            "config": self.config.to_json(),
            **{k: self.count(k) for k in labels},
            "fractions": {k: self.fraction(k) for k in labels},
            "conjecture_residuals": self.residual_stats(),
            "role_assignments": self.role_tally(),
            "per_run": [o.summary() for o in self.outcomes],
        }

    CSV_COLUMNS = ("seed", "status", "loss", "iterations", "classification", "conjecture_residual", "max_G_gamma1", "roles")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for o in self.outcomes:
            s = o.summary()
            s["roles"] = "" if o.roles is None else "|".join(o.roles)
            w.writerow(["" if s[c] is None else s[c] for c in self.CSV_COLUMNS])
        return buf.getvalue()


def experiment(n_runs: int, cfg: SearchConfig | None = None, jobs: int | None = None, master_seed: int = 0) -> ExperimentReport:
    """Run ``optimize`` over ``n_runs`` derived seeds, optionally in a process pool."""
    if n_runs < 1:
        raise MubCubeError("n_runs must be at least 1")
    cfg = cfg or SearchConfig()
    jobs = default_jobs() if jobs is None else jobs
    tasks = [(run_seed(master_seed, i), cfg) for i in range(n_runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run, tasks))
    else:
        outcomes = [_run(t) for t in tasks]
    return ExperimentReport(int(master_seed), cfg, outcomes)


ZAUNER_ORDER = ("fourier_t", "szollosi", "fourier")


def zauner_pair_from_triplet(triplet: MubSystem, roles: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Rotate a triplet to the form ``(I, F1/sqrt6, F2/sqrt6)`` with a Szöllősi middle transition.

    ``roles`` are the cyclic transition roles. They must be a rotation of
    ``ZAUNER_ORDER`` (F1 transposed-Fourier, F1^* F2 / sqrt6 Szöllősi, F2^* Fourier).
    """
    roles = tuple(roles)
    for shift in range(3):
        if roles[shift:] + roles[:shift] == ZAUNER_ORDER:
            break
    else:
        raise MubCubeError(f"roles {roles} are not a cyclic rotation of {ZAUNER_ORDER}")
    xs = [triplet[(shift + i) % 3] for i in range(3)]
    u = dagger(xs[0])
    return np.sqrt(D) * u @ xs[1], np.sqrt(D) * u @ xs[2]


__all__ = [
    "ExperimentReport",
    "PhasePoint",
    "SearchConfig",
    "SearchOutcome",
    "analyze",
    "descend",
    "experiment",
    "gradient",
    "initial_point",
    "loss",
    "loss_and_gradient",
    "loss_terms",
    "optimize",
    "phase_gradient",
    "phase_loss",
    "run_seed",
    "zauner_pair_from_triplet",
    "ZAUNER_ORDER",
]
