"""Seeded Monte-Carlo validation of corrected-loss learning.

Randomness contract
-------------------
All sampling uses numpy's Philox counter-based generator.  Substreams are
derived with splitmix64, a fixed 64-bit mixing function, so the stream for
trial ``i`` is ``Philox(key=seed XOR splitmix64(i))`` regardless of execution
order.  Trials are therefore independent and could run concurrently; results
are aggregated in trial-index order so repeated runs are bit-identical.

Excess risk is always scored against the true clean distribution (it is
available analytically here); this is a validation lab for bound formulas,
not a benchmark harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import catalog
from .bounds import eta_compatibility
from .errors import (
    DivergedObjective,
    EmptySample,
    InvalidParameter,
    ParseError,
    PreconditionFailed,
    UnknownOutcome,
)
from .kernels import Dist, Kernel, Space, dist_from_json, kernel_from_json
from .reconstruct import LossTable, corrected_loss, loss_from_json, pseudoinverse

_MASK64 = (1 << 64) - 1

#: Clean risks below this are treated as exactly zero (separability test).
EXCESS_ZERO_TOL = 1e-12


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer; the repo's stream-splitting hash."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def _trial_seed(seed: int, trial_index: int) -> int:
    return (seed & _MASK64) ^ splitmix64(trial_index)


def _as_indices(space: Space, sample: Sequence) -> np.ndarray:
    values = np.asarray(sample)
    if values.dtype.kind in "iu":
        idx = values.astype(np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= len(space)):
            raise UnknownOutcome(f"sample index outside [0, {len(space)})")
        return idx
    try:
        return np.asarray([space.labels.index(str(v)) for v in values], dtype=np.int64)
    except ValueError:
        raise UnknownOutcome(f"sample value not in space {space.labels!r}") from None


def sample(p: Dist, n: int, seed: int) -> np.ndarray:
    """Draw n iid outcome indices by inverse CDF over the space's order."""
    if n < 0:
        raise InvalidParameter(f"sample size must be >= 0, got {n}")
    cum = np.cumsum(p.weights)
    u = _generator(seed).random(n)
    return np.minimum(np.searchsorted(cum, u, side="right"), len(p.space) - 1).astype(np.int64)


def corrupt(t: Kernel, clean: Sequence, seed: int) -> np.ndarray:
    """Independently push each clean outcome through the corruption kernel."""
    idx = _as_indices(t.domain, clean)
    cum = np.cumsum(t.matrix, axis=0)
    u = _generator(seed).random(idx.shape[0])
    out = np.empty_like(idx)
    for j in np.unique(idx):
        here = idx == j
        out[here] = np.searchsorted(cum[:, j], u[here], side="right")
    return np.minimum(out, len(t.codomain) - 1)


def erm(sample_values: Sequence, loss: LossTable) -> str:
    """The action minimizing average loss on the sample; ties go to the
    lowest action index."""
    idx = _as_indices(loss.outcomes, sample_values)
    if idx.size == 0:
        raise EmptySample("empirical risk minimization needs at least one observation")
    counts = np.bincount(idx, minlength=len(loss.outcomes)).astype(np.float64)
    empirical = (counts / idx.size) @ loss.values
    return loss.actions[int(np.argmin(empirical))]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    clean_dist: Dist
    loss: LossTable
    corruption: catalog.CorruptionSpec | Kernel
    sample_sizes: tuple[int, ...]
    trials: int
    seed: int

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sample_sizes)
        if not sizes or any(n < 1 for n in sizes):
            raise InvalidParameter("sample sizes must be positive")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidParameter("sample sizes must be strictly increasing")
        if self.trials < 1:
            raise InvalidParameter("need at least one trial")
        if self.loss.outcomes != self.clean_dist.space:
            raise InvalidParameter("loss outcomes must match the clean distribution")
        object.__setattr__(self, "sample_sizes", sizes)
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "seed", int(self.seed))

    def kernel(self) -> Kernel:
        if isinstance(self.corruption, Kernel):
            return self.corruption
        return catalog.build_kernel(self.corruption)


@dataclass(frozen=True)
class RiskPoint:
    n: int
    mean_excess_risk: float
    std_error: float
    envelope: float


@dataclass(frozen=True)
class RiskCurve:
    rows: tuple[RiskPoint, ...]

    def to_csv(self) -> str:
        lines = ["n,mean_excess_risk,std_error,envelope"]
        for r in self.rows:
            lines.append(f"{r.n},{r.mean_excess_risk!r},{r.std_error!r},{r.envelope!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FastRateReport:
    """Risk curve plus halving ratios mean_excess(2n) / mean_excess(n).

    A ratio is omitted when the denominator is zero (the excess already
    collapsed); ``mean_ratio`` averages the remaining ratios and is 0.0 when
    every pair collapsed.
    """

    curve: RiskCurve
    ratios: tuple[tuple[int, float], ...]
    mean_ratio: float


def _excess_risks(config: ExperimentConfig, t: Kernel, table: LossTable) -> dict[int, np.ndarray]:
    """Per sample size, the per-trial true excess risk of corrected ERM."""
    p = config.clean_dist
    clean_risks = p.weights @ config.loss.values
    best = float(clean_risks.min())
    by_n: dict[int, np.ndarray] = {}
    for n_idx, n in enumerate(config.sample_sizes):
        excess = np.empty(config.trials)
        for trial in range(config.trials):
            ts = _trial_seed(config.seed, n_idx * config.trials + trial)
            clean = sample(p, n, splitmix64(ts ^ 1))
            noisy = corrupt(t, clean, splitmix64(ts ^ 2))
            chosen = erm(noisy, table)
            excess[trial] = float(clean_risks[config.loss.actions.index(chosen)]) - best
        by_n[n] = excess
    return by_n


def _curve_from(config: ExperimentConfig, by_n: dict[int, np.ndarray], sup: float) -> RiskCurve:
    kl = math.log(len(config.loss.actions))
    rows = []
    for n in config.sample_sizes:
        excess = by_n[n]
        stderr = float(excess.std(ddof=1) / math.sqrt(len(excess))) if len(excess) > 1 else 0.0
        rows.append(RiskPoint(
            n=n,
            mean_excess_risk=float(excess.mean()),
            std_error=stderr,
            envelope=sup * math.sqrt(2.0 * kl / n),
        ))
    return RiskCurve(tuple(rows))


def risk_curve(config: ExperimentConfig) -> RiskCurve:
    """Corrected-loss ERM excess risk versus the PAC-Bayes envelope.

    For each sample size, ``trials`` independent replicates draw a clean
    sample, corrupt it, run ERM with the corrected loss and score the true
    excess risk.  The envelope is ||corrected||_inf * sqrt(2 ln|A| / n), the
    uniform-prior complexity term.
    """
    t = config.kernel()
    table = corrected_loss(pseudoinverse(t), config.loss)
    by_n = _excess_risks(config, t, table)
    return _curve_from(config, by_n, table.sup_norm)


def fastrate_curve(config: ExperimentConfig) -> FastRateReport:
    """The same pipeline for separable problems, reporting decay ratios.

    Requires a separable clean distribution (some action has zero risk) and
    a corruption compatible with the loss (finite eta), the regime where
    corrected ERM keeps a fast rate.
    """
    p = config.clean_dist
    if float((p.weights @ config.loss.values).min()) > EXCESS_ZERO_TOL:
        raise PreconditionFailed("clean distribution is not separable for this loss")
    t = config.kernel()
    rec = pseudoinverse(t)
    if math.isinf(eta_compatibility(config.loss, t, rec)):
        raise PreconditionFailed("loss and corruption are not compatible (eta is infinite)")
    table = corrected_loss(rec, config.loss)
    by_n = _excess_risks(config, t, table)
    curve = _curve_from(config, by_n, table.sup_norm)
    means = {r.n: r.mean_excess_risk for r in curve.rows}
    ratios = []
    for n in config.sample_sizes:
        if 2 * n in means and means[n] > 0.0:
            ratios.append((n, means[2 * n] / means[n]))
    mean_ratio = sum(r for _, r in ratios) / len(ratios) if ratios else 0.0
    return FastRateReport(curve=curve, ratios=tuple(ratios), mean_ratio=mean_ratio)


# -- corrected proper-loss minimization ------------------------------------------

@dataclass(frozen=True)
class CanonicalProperLoss:
    """A canonical-form proper loss ell(z, v) = v[z] + psi(v).

    ``psi`` must be convex with ``grad`` its gradient; convexity is probed
    by randomized midpoint tests rather than assumed.
    """

    name: str
    psi: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]

    def loss(self, z: int, v: np.ndarray) -> float:
        return float(v[z]) + self.psi(v)

    def midpoint_convex(self, dim: int, trials: int, seed: int,
                        scale: float = 3.0, atol: float = 1e-9) -> bool:
        rng = _generator(seed)
        for _ in range(trials):
            v1 = rng.normal(0.0, scale, dim)
            v2 = rng.normal(0.0, scale, dim)
            if self.psi(0.5 * (v1 + v2)) > 0.5 * (self.psi(v1) + self.psi(v2)) + atol:
                return False
        return True


def log_loss() -> CanonicalProperLoss:
    """Log loss in canonical form: psi(v) = log sum_z exp(-v[z]).

    The minimizer of <p, v> + psi(v) satisfies softmax(-v) = p, so the fitted
    link recovers the data distribution.
    """
    def psi(v: np.ndarray) -> float:
        m = float(np.max(-v))
        return m + math.log(float(np.exp(-v - m).sum()))

    def grad(v: np.ndarray) -> np.ndarray:
        e = np.exp(-v + v.min())
        return -(e / e.sum())

    return CanonicalProperLoss(name="log", psi=psi, grad=grad)


@dataclass(frozen=True)
class FitResult:
    link: np.ndarray
    objective: float


def _objective_parts(corrected: bool, t: Kernel, sample_values: Sequence):
    space = t.codomain if corrected else t.domain
    idx = _as_indices(space, sample_values)
    if idx.size == 0:
        raise EmptySample("cannot fit to an empty sample")
    freq = np.bincount(idx, minlength=len(space)) / idx.size
    return pseudoinverse(t).matrix @ freq if corrected else freq


def fit_proper(
    corrected: bool,
    t: Kernel,
    sample_values: Sequence,
    psi: CanonicalProperLoss,
    steps: int = 500,
    rate: float = 1.0,
) -> FitResult:
    """Gradient descent on the (optionally corruption-corrected) empirical
    canonical objective.

    The clean objective is mean v[z] + psi(v); the corrected one replaces the
    empirical clean frequencies with their reconstruction from corrupted
    counts, which preserves convexity.  The step size halves whenever a step
    would increase the objective (at most 30 halvings per step), so the
    objective sequence is non-increasing.
    """
    linear = _objective_parts(corrected, t, sample_values)
    v = np.zeros(len(t.domain))

    def g(x: np.ndarray) -> float:
        return float(linear @ x) + psi.psi(x)

    current = g(v)
    if not math.isfinite(current):
        raise DivergedObjective(f"objective is {current!r} at the start")
    step = rate
    for _ in range(steps):
        grad = linear + psi.grad(v)
        if not np.all(np.isfinite(grad)):
            raise DivergedObjective("gradient left the finite range")
        moved = False
        for _ in range(30):
            candidate = v - step * grad
            value = g(candidate)
            # overflow counts as an increase: shrink the step instead
            if math.isfinite(value) and value <= current:
                v, current, moved = candidate, value, True
                break
            step *= 0.5
        if not moved:
            break
    return FitResult(link=v, objective=current)


def gradient_check(
    psi: CanonicalProperLoss,
    t: Kernel,
    at: np.ndarray,
    weights: np.ndarray | None = None,
    h: float = 1e-5,
) -> float:
    """Central-difference check of the corrected objective's gradient.

    ``weights`` is a distribution over corrupted outcomes (uniform by
    default).  Returns the worst coordinate-wise relative error.
    """
    rec = pseudoinverse(t)
    if weights is None:
        weights = np.full(len(t.codomain), 1.0 / len(t.codomain))
    linear = rec.matrix @ np.asarray(weights, dtype=np.float64)
    at = np.asarray(at, dtype=np.float64)

    def g(x: np.ndarray) -> float:
        return float(linear @ x) + psi.psi(x)

    analytic = linear + psi.grad(at)
    worst = 0.0
    for i in range(at.shape[0]):
        bump = np.zeros_like(at)
        bump[i] = h
        numeric = (g(at + bump) - g(at - bump)) / (2.0 * h)
        worst = max(worst, abs(numeric - analytic[i]) / max(1.0, abs(analytic[i])))
    return worst


# -- JSON wire format -------------------------------------------------------------
# {"clean": <dist json>, "loss": <loss json>,
#  "corruption": <corruption-spec json> | {"kernel": <kernel json>},
#  "sample_sizes": [...], "trials": int, "seed": int}

def config_from_json(obj: dict) -> ExperimentConfig:
    needed = {"clean", "loss", "corruption", "sample_sizes", "trials", "seed"}
    if not isinstance(obj, dict) or not needed <= set(obj):
        raise ParseError(f"config JSON needs keys {sorted(needed)}")
    corr = obj["corruption"]
    if isinstance(corr, dict) and "kernel" in corr:
        corruption = kernel_from_json(corr["kernel"])
    else:
        corruption = catalog.spec_from_json(corr)
    return ExperimentConfig(
        clean_dist=dist_from_json(obj["clean"]),
        loss=loss_from_json(obj["loss"]),
        corruption=corruption,
        sample_sizes=tuple(obj["sample_sizes"]),
        trials=obj["trials"],
        seed=obj["seed"],
    )
