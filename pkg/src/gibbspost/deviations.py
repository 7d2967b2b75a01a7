"""Decay-rate bounds for posterior concentration and empirical slope fits.

``rate_bound_direct`` evaluates the exponent bounds from relative entropies
on the grid; ``empirical_decay`` fits the observed decay of a posterior
trajectory; ``ldp_rate_bound`` evaluates a constrained variational bound
over Markov measures of a fixed depth.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import FitError, InputError, NumericError
from .nonadditive import SequenceFamily, free_energy
from .posterior import BALL_TOL, ParamFamily, PriorMeasure
from .sampling import SeededStream
from .shift import count_admissible
from .thermo import (
    GibbsMeasure,
    Potential,
    entropy,
    expectation,
    gibbs_measure,
    pressure,
    relative_entropy,
)

__all__ = [
    "ZETA",
    "RateReport",
    "rate_bound_direct",
    "DecayFit",
    "empirical_decay",
    "LdpBound",
    "ldp_rate_bound",
    "posterior_decay_rates",
]

ZETA = 0.01


@dataclass(frozen=True)
class RateReport:
    """Exponent bounds for ``1 - Pi_n(B_delta | y)`` and, once fitted, the observed slope.

    ``rho_delta = -min_{theta outside B_delta} h(mu_0 | mu_theta)``;
    ``d_delta = sum_{theta in B_delta} w_theta h(mu_0 | mu_theta)``;
    ``composite_exponent = rho_delta + h(mu_0) Pi_0(B_delta) + d_delta + zeta``.
    """

    theta0: tuple[float, ...]
    delta: float
    rho_delta: float
    d_delta: float
    ball_mass: float
    entropy0: float
    zeta: float
    composite_exponent: float
    feasible: bool
    degenerate: bool
    argmin_outside: tuple[float, ...]
    empirical_slope: float = float("nan")
    fit_r2: float = float("nan")
    window: tuple[int, int] = (0, 0)

    def with_fit(self, fit: "DecayFit") -> "RateReport":
        return replace(self, empirical_slope=fit.slope, fit_r2=fit.r2, window=(fit.n_min, fit.n_max))

    def as_row(self) -> dict:
        row = asdict(self)
        row["theta0"] = " ".join(repr(float(v)) for v in self.theta0)
        row["argmin_outside"] = " ".join(repr(float(v)) for v in self.argmin_outside)
        row["window"] = f"{self.window[0]} {self.window[1]}"
        return row


def rate_bound_direct(
    fam: ParamFamily, theta0, prior: PriorMeasure, delta: float, zeta: float = ZETA
) -> RateReport:
    if not delta > 0:
        raise InputError("delta must be positive")
    i0 = fam.index_of(theta0)
    mu0 = fam.measures[i0]
    rel = np.array([relative_entropy(mu0, m) for m in fam.measures])
    dist = np.abs(fam.nodes - fam.nodes[i0]).max(axis=1)
    inside = dist < delta - BALL_TOL
    if inside.all():
        raise InputError("B_delta covers every node")
    if not inside.any():
        raise InputError("B_delta contains no node")
    outside = np.flatnonzero(~inside)
    j = outside[np.argmin(rel[outside])]
    rho = -float(rel[j])
    d_delta = float((prior.weights[inside] * rel[inside]).sum())
    mass = float(prior.weights[inside].sum())
    h0 = entropy(mu0)
    comp = rho + h0 * mass + d_delta + zeta
    return RateReport(
        theta0=tuple(float(v) for v in fam.nodes[i0]),
        delta=float(delta),
        rho_delta=rho,
        d_delta=d_delta,
        ball_mass=mass,
        entropy0=float(h0),
        zeta=float(zeta),
        composite_exponent=float(comp),
        feasible=bool(comp < 0),
        degenerate=bool(rho == 0.0),
        argmin_outside=tuple(float(v) for v in fam.nodes[j]),
    )


class DecayFit(NamedTuple):
    slope: float
    intercept: float
    r2: float
    n_min: int
    n_max: int
    points: int


def empirical_decay(
    series: Sequence[tuple[int, float]],
    transform: str = "log_of_value",
    window: tuple[float, float] | None = None,
    min_fraction: float = 0.2,
) -> DecayFit:
    """Least-squares slope of ``log v_n`` or ``log(1 - v_n)`` against ``n``.

    ``transform="log_given"`` takes values that are already logarithms,
    e.g. a log outside-ball mass computed without cancellation. The default window is ``[min_fraction * n_max, n_max]``. Non-finite
    transformed values inside the window are dropped; fewer than 4 usable
    points is an error.
    """
    if transform not in ("log_of_value", "log_of_one_minus_value", "log_given"):
        raise InputError(f"unknown transform {transform!r}")
    n = np.array([float(s[0]) for s in series])
    v = np.array([float(s[1]) for s in series])
    if n.size == 0:
        raise FitError("empty series")
    with np.errstate(divide="ignore", invalid="ignore"):
        if transform == "log_of_value":
            t = np.log(v)
        elif transform == "log_of_one_minus_value":
            t = np.log1p(-v)
        else:
            t = v
    lo, hi = (min_fraction * n.max(), n.max()) if window is None else window
    keep = (n >= lo) & (n <= hi) & np.isfinite(t)
    if keep.sum() < 4:
        raise FitError(f"only {int(keep.sum())} finite points in the fit window")
    x, z = n[keep], t[keep]
    slope, intercept = np.polyfit(x, z, 1)
    resid = z - (slope * x + intercept)
    ss_tot = float(((z - z.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), r2, int(x.min()), int(x.max()), int(keep.sum()))


class LdpBound(NamedTuple):
    """Best value of ``h(eta) + F(eta, Phi)`` found under ``F(eta, Psi) >= c``.

    Always a lower bound of the supremum over all invariant measures.
    """

    value: float
    eta: GibbsMeasure | None
    constraint_value: float
    feasible: bool
    note: str


def _markov_measure_from_logits(spec, depth, v) -> GibbsMeasure:
    return gibbs_measure(Potential(spec, depth, v))


def ldp_rate_bound(
    f: SequenceFamily,
    potential: Potential,
    threshold: float,
    depth: int,
    stream: SeededStream | None = None,
    restarts: int = 16,
    n_list: Sequence[int] = (4, 6, 8, 10, 12),
    logit_bound: float = 30.0,
) -> LdpBound:
    """Maximize ``h(eta) + int potential d eta`` over depth-``depth`` Markov measures
    subject to ``F(eta, f) >= threshold``.

    ``potential`` must be normalized (zero pressure). Markov measures are
    parameterized by the logits of their Jacobian on admissible
    ``depth``-words; SLSQP runs from ``restarts`` seeded starting points.
    The constraint uses the family's additive representative when present
    and exact finite-``n`` free energies otherwise.
    """
    if depth < 1:
        raise InputError("depth must be >= 1")
    if potential.spec != f.spec:
        raise InputError("potential and family live on different subshifts")
    if abs(pressure(potential)) > 1e-8:
        raise InputError("potential must be normalized")
    spec = f.spec
    W = count_admissible(spec, depth)
    stream = stream or SeededStream(0)
    starts, _ = stream.uniforms(restarts * W)
    starts = (starts.reshape(restarts, W) - 0.5) * 4.0

    cache: dict[bytes, tuple[float, float]] = {}

    def evaluate(v):
        key = np.asarray(v, dtype=float).tobytes()
        if key not in cache:
            eta = _markov_measure_from_logits(spec, depth, v)
            obj = entropy(eta) + expectation(eta, potential)
            if threshold == -np.inf:
                con = np.inf
            elif f.representative is not None:
                con = expectation(eta, f.representative)
            else:
                con = free_energy(eta, f, n_list).value
            cache[key] = (obj, con)
        return cache[key]

    cons = []
    if threshold != -np.inf:
        cons = [{"type": "ineq", "fun": lambda v: evaluate(v)[1] - threshold}]
    best = (-np.inf, None, -np.inf)
    for r in range(restarts):
        try:
            res = minimize(
                lambda v: -evaluate(v)[0],
                starts[r],
                method="SLSQP",
                bounds=[(-logit_bound, logit_bound)] * W,
                constraints=cons,
                options={"maxiter": 500, "ftol": 1e-13},
            )
        except (NumericError, FloatingPointError, ValueError):
            continue
        obj, con = evaluate(res.x)
        if threshold != -np.inf and con < threshold - 1e-8:
            continue
        if obj > best[0]:
            best = (obj, res.x, con)
    if best[1] is None:
        return LdpBound(-np.inf, None, -np.inf, False, "no feasible Markov measure found")
    eta = _markov_measure_from_logits(spec, depth, best[1])
    return LdpBound(
        float(best[0]),
        eta,
        float(best[2]),
        True,
        f"lower bound over depth-{depth} Markov measures",
    )


def posterior_decay_rates(fam: ParamFamily, nu: GibbsMeasure) -> np.ndarray:
    """Per-node exponent of ``Pi_n({theta} | y)`` for ``y ~ nu``.

    ``int log J_theta d nu - max_theta' int log J_theta' d nu``; the best
    node gets 0. Valid whether or not ``nu`` belongs to the family.
    """
    e = np.array([expectation(nu, m.jacobian) for m in fam.measures])
    return e - e.max()
