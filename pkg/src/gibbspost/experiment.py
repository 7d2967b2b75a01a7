"""Run a configured experiment: build the family, sample replicas, write CSVs and a manifest.

Outputs in the run directory:

``trajectory.csv``       long format ``replica, n, quantity, target, value``
``posterior_final.csv``  every node's weight at the last ``n`` of each replica
``rates.csv``            exponent bounds per delta, with per-replica slope fits
``lyapunov.csv``         annealed exponent per node (cocycle families with ``[lyapunov]``)
``manifest.json``        config hash, seeds, versions, output hashes, completion state

Nothing time-dependent is written, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels
from .cocycle import annealed_lyapunov
from .config import ExperimentConfig, load_config
from .deviations import empirical_decay, rate_bound_direct
from .errors import FitError, InputError, NumericError
from .families import (
    bernoulli_atoms_family,
    cocycle_family,
    jacobian_mixture_family,
    markov_2x2_family,
)
from .losses import CocycleLogNormPsi, CocycleNormLoss, ScaledPsi, ZeroLoss, cross_entropy_loss
from .posterior import (
    ParamFamily,
    PriorMeasure,
    _variance_flags,
    direct_loglik,
    midpoint_grid,
    posterior_series,
    uniform_prior,
)
from .sampling import SeededStream, sample_orbit
from .shift import SubshiftSpec
from .thermo import GibbsMeasure, bernoulli_measure, markov_measure

__all__ = ["build_family", "build_prior", "build_sampling_measure", "ReplicaResult", "run_replica", "run_experiment"]

MAX_TRACKED_NODES = 16
MC_CHILD_TAG = 1


def _spec(cfg: ExperimentConfig) -> SubshiftSpec:
    if cfg.transitions is None:
        return SubshiftSpec.full_shift(cfg.alphabet_size)
    return SubshiftSpec.from_matrix(cfg.transitions.astype(int))


def build_family(cfg: ExperimentConfig) -> tuple[ParamFamily, dict]:
    """The parameter family and any side objects (``cocycles`` for cocycle families)."""
    f = cfg.family
    kind = f["kind"]
    if kind == "markov_2x2":
        grid = midpoint_grid([tuple(f["a_range"]), tuple(f["b_range"])], f["resolution"])
        return markov_2x2_family(grid), {}
    if kind == "bernoulli_atoms":
        return bernoulli_atoms_family(f["labels"].tolist(), f["probs"].tolist()), {}
    if kind == "jacobian_mixture":
        spec = _spec(cfg)
        grid = midpoint_grid([tuple(f["t_range"])], f["resolution"])
        j0 = markov_measure(f["j0"], spec)
        j1 = markov_measure(f["j1"], spec)
        return jacobian_mixture_family(grid, j0, j1), {}
    if kind == "cocycle":
        grid = midpoint_grid([tuple(f["theta1_range"]), tuple(f["theta2_range"])], f["resolution"])
        fam, cocycles = cocycle_family(grid, f.get("bias", 0.0))
        return fam, {"cocycles": cocycles}
    raise InputError(f"unknown family kind {kind!r}")


def build_prior(cfg: ExperimentConfig, fam: ParamFamily) -> PriorMeasure:
    if cfg.prior["kind"] == "uniform":
        return uniform_prior(fam)
    w = np.asarray(cfg.prior["weights"], dtype=float)
    return PriorMeasure(fam.nodes, w / w.sum())


def build_sampling_measure(cfg: ExperimentConfig, fam: ParamFamily) -> GibbsMeasure:
    s = cfg.sampling
    if s["kind"] == "node":
        return fam.measures[fam.index_of(s["node"])]
    if s["kind"] == "bernoulli":
        return bernoulli_measure(_spec(cfg), s["probs"])
    return markov_measure(s["matrix"], _spec(cfg))


class _Likelihood:
    """``(log-likelihood, relative std err)`` matrices of shape ``(nodes, len(n))``."""

    def __init__(self, cfg: ExperimentConfig, fam: ParamFamily, extra: dict):
        loss = cfg.loss
        self.scheme = loss["scheme"]
        self.fam = fam
        self.obj = None
        if self.scheme == "exp_almost_additive":
            phi = loss["phi"]
            if phi == "zero":
                self.obj = ZeroLoss()
            elif phi == "cross_entropy":
                self.obj = cross_entropy_loss(fam, loss["theta0"])
            else:
                self.obj = CocycleNormLoss(extra["cocycles"], loss["form"], loss["samples"])
        elif self.scheme == "log_almost_additive":
            if loss["psi"] == "scaled":
                self.obj = ScaledPsi(loss["g"], loss["noise_bound"])
            else:
                self.obj = CocycleLogNormPsi(extra["cocycles"], loss["form"], loss["samples"])

    def __call__(self, y, n_arr, stream):
        if self.scheme == "direct_cylinder":
            ll = direct_loglik(self.fam, y, n_arr)
            return ll, np.zeros_like(ll)
        if self.scheme == "exp_almost_additive":
            est = self.obj.log_integrals(self.fam, y, n_arr, stream)
            return est.values, est.std_err
        est = self.obj.values(self.fam, y, n_arr, stream)
        if not (est.values > 0).all():
            raise NumericError("psi_n must be positive at every node and every n")
        return np.log(est.values), est.std_err / est.values


@dataclass
class ReplicaResult:
    index: int
    seed: int
    n: np.ndarray
    log_weights: np.ndarray  # nodes x len(n)
    flags: tuple[str, ...]


class _Context:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.fam, self.extra = build_family(cfg)
        self.prior = build_prior(cfg, self.fam)
        self.nu = build_sampling_measure(cfg, self.fam)
        self.lik = _Likelihood(cfg, self.fam, self.extra)
        self.n = np.asarray(cfg.n_schedule, dtype=np.int64)


def run_replica(ctx: _Context, index: int) -> ReplicaResult:
    cfg = ctx.cfg
    stream = SeededStream(cfg.seed).replica(index)
    y = sample_orbit(ctx.nu, int(ctx.n[-1]), stream)
    ll, se = ctx.lik(y, ctx.n, stream.child(MC_CHILD_TAG))
    flags = _variance_flags(se)
    states = posterior_series(ctx.prior, ll, ctx.n, sample_id=index, flags=flags, std_err=se)
    return ReplicaResult(index, stream.seed, ctx.n, np.array([st.log_weights for st in states]).T, flags)


_WORKER_CTX: _Context | None = None


def _worker_init(text: str, seed: int, replicas: int) -> None:
    global _WORKER_CTX
    from .config import _parse

    cfg, _ = _parse(text)
    _WORKER_CTX = _Context(cfg.with_overrides(seed=seed, replicas=replicas))


def _worker_run(index: int) -> ReplicaResult:
    return run_replica(_WORKER_CTX, index)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue().encode()


def _log_outside(log_w: np.ndarray, inside: np.ndarray) -> float:
    out = log_w[~inside]
    if out.size == 0:
        return -np.inf
    top = out.max()
    if top == -np.inf:
        return -np.inf
    return float(top + np.log(np.exp(out - top).sum()))


def _trajectory_rows(ctx: _Context, results, balls):
    nodes_tracked = len(ctx.fam) <= MAX_TRACKED_NODES
    for res in results:
        for j, n in enumerate(res.n):
            lw = res.log_weights[:, j]
            yield (res.index, int(n), "argmax", "", int(np.argmax(lw)))
            if nodes_tracked:
                for i in range(len(ctx.fam)):
                    yield (res.index, int(n), "weight", i, float(np.exp(lw[i])))
            for delta, inside in balls:
                lo = _log_outside(lw, inside)
                yield (res.index, int(n), "ball_mass", _fmt(delta), float(-np.expm1(lo)))
                yield (res.index, int(n), "log_outside", _fmt(delta), lo)


def _balls(ctx: _Context):
    r = ctx.cfg.rates
    if not r:
        return []
    center = np.asarray(r["theta0"], dtype=float)
    dist = np.abs(ctx.fam.nodes - center).max(axis=1)
    from .posterior import BALL_TOL

    return [(float(d), dist < d - BALL_TOL) for d in r["deltas"]]


def _rate_rows(ctx: _Context, results, balls):
    r = ctx.cfg.rates
    header = None
    rows = []
    for delta, inside in balls:
        rep = rate_bound_direct(ctx.fam, r["theta0"], ctx.prior, delta, r["zeta"])
        base = rep.as_row()
        if header is None:
            header = ["replica", *base.keys(), "fit_status"]
        rows.append(["bound", *base.values(), "none"])
        for res in results:
            series = [(int(n), _log_outside(res.log_weights[:, j], inside)) for j, n in enumerate(res.n)]
            try:
                fit = empirical_decay(series, "log_given")
                rows.append([res.index, *rep.with_fit(fit).as_row().values(), "ok"])
            except FitError:
                rows.append([res.index, *base.values(), "too_few_points"])
    return header, rows


def _lyapunov_rows(ctx: _Context):
    n_list = ctx.cfg.lyapunov["n_list"]
    cocycles = ctx.extra["cocycles"]
    mc = SeededStream(ctx.cfg.seed).child(MC_CHILD_TAG)
    d = ctx.fam.nodes.shape[1]
    header = ["node", *[f"theta_{k + 1}" for k in range(d)], "bound", "extrapolated", "last"]
    rows = []
    for i, (c, m) in enumerate(zip(cocycles, ctx.fam.measures)):
        est = annealed_lyapunov(c, m, n_list, mc)
        rows.append([i, *ctx.fam.nodes[i].tolist(), est.bound, est.extrapolated, est.last])
    return header, rows


def _versions() -> dict:
    return {
        "gibbspost": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "backend": kernels.BACKEND,
    }


def _write_manifest(out: Path, cfg: ExperimentConfig, state: str, outputs: dict, flags=(), error: str = ""):
    man = {
        "name": cfg.name,
        "state": state,
        "config_sha256": hashlib.sha256(cfg.text.encode()).hexdigest(),
        "seed": cfg.seed,
        "replicas": cfg.replicas,
        "replica_seeds": [SeededStream(cfg.seed).replica(i).seed for i in range(cfg.replicas)],
        "n_schedule": list(cfg.n_schedule),
        "versions": _versions(),
        "outputs": outputs,
        "flags": sorted(set(flags)),
    }
    if error:
        man["error"] = error
    (out / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    return man


def run_experiment(
    cfg: ExperimentConfig | str | Path,
    out_dir: str | Path,
    workers: int = 1,
    log=None,
) -> dict:
    """Execute every replica and write the outputs; returns the manifest dict.

    The manifest is written first with ``state = "running"`` and rewritten as
    ``"complete"`` or ``"failed"``, so partial output is always marked.
    """
    if not isinstance(cfg, ExperimentConfig):
        cfg = load_config(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_manifest(out, cfg, "running", {})
    outputs: dict[str, str] = {}
    flags: list[str] = []

    def emit(name: str, data: bytes) -> None:
        (out / name).write_bytes(data)
        outputs[name] = hashlib.sha256(data).hexdigest()
        if log:
            log(f"wrote {out / name}")

    try:
        ctx = _Context(cfg)
        if workers > 1 and cfg.replicas > 1:
            with ProcessPoolExecutor(
                max_workers=workers, initializer=_worker_init, initargs=(cfg.text, cfg.seed, cfg.replicas)
            ) as ex:
                results = list(ex.map(_worker_run, range(cfg.replicas)))
        else:
            results = [run_replica(ctx, i) for i in range(cfg.replicas)]
        for res in results:
            flags.extend(res.flags)
        balls = _balls(ctx)
        emit("trajectory.csv", _csv_bytes(["replica", "n", "quantity", "target", "value"], _trajectory_rows(ctx, results, balls)))
        d = ctx.fam.nodes.shape[1]
        final = (
            (res.index, i, *ctx.fam.nodes[i].tolist(), float(res.log_weights[i, -1]), float(np.exp(res.log_weights[i, -1])))
            for res in results
            for i in range(len(ctx.fam))
        )
        emit(
            "posterior_final.csv",
            _csv_bytes(["replica", "node", *[f"theta_{k + 1}" for k in range(d)], "log_weight", "weight"], final),
        )
        if balls:
            emit("rates.csv", _csv_bytes(*_rate_rows(ctx, results, balls)))
        if cfg.lyapunov and "cocycles" in ctx.extra:
            emit("lyapunov.csv", _csv_bytes(*_lyapunov_rows(ctx)))
    except Exception as exc:
        _write_manifest(out, cfg, "failed", outputs, flags, f"{type(exc).__name__}: {exc}")
        raise
    return _write_manifest(out, cfg, "complete", outputs, flags)
