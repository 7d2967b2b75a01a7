"""Experiment configuration: a flat INI file with one section per concern.

Numbers may be written as fractions (``1/3``); vectors are whitespace
separated and matrix rows are separated by ``;``. A Markov matrix is
column-stochastic: column ``s`` is the law of the successor of ``s``.

Sections
--------
``[experiment]``  name, description, seed, replicas, n_schedule, time_budget_s
``[subshift]``    alphabet_size, transitions (optional 0/1 matrix)
``[family]``      kind = markov_2x2 | bernoulli_atoms | jacobian_mixture | cocycle
``[prior]``       kind = uniform | weights
``[sampling]``    kind = node | bernoulli | markov
``[loss]``        scheme = direct_cylinder | exp_almost_additive | log_almost_additive
``[rates]``       theta0, deltas, zeta (optional)
``[lyapunov]``    n_list (optional, cocycle families only)
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigError

__all__ = [
    "ExperimentConfig",
    "validate_config",
    "load_config",
    "parse_schedule",
    "bundled_configs",
    "bundled_config_path",
]

FAMILY_KINDS = ("markov_2x2", "bernoulli_atoms", "jacobian_mixture", "cocycle")
SAMPLING_KINDS = ("node", "bernoulli", "markov")
SCHEMES = ("direct_cylinder", "exp_almost_additive", "log_almost_additive")
PHI_KINDS = ("zero", "cross_entropy", "cocycle_norm")
PSI_KINDS = ("cocycle_lognorm", "scaled")
STOCHASTIC_TOL = 1e-9

_CONFIG_DIR = Path(__file__).with_name("configs")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; every section is a plain dict of parsed values."""

    name: str
    description: str
    seed: int
    replicas: int
    n_schedule: tuple[int, ...]
    time_budget_s: float
    alphabet_size: int
    transitions: np.ndarray | None
    family: dict
    prior: dict
    sampling: dict
    loss: dict
    rates: dict = field(default_factory=dict)
    lyapunov: dict = field(default_factory=dict)
    text: str = ""

    def with_overrides(self, seed: int | None = None, replicas: int | None = None) -> "ExperimentConfig":
        from dataclasses import replace

        kw = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if replicas is not None:
            kw["replicas"] = int(replicas)
        return replace(self, **kw)


def _num(tok: str) -> float:
    return float(Fraction(tok.strip()))


def _vector(text: str) -> np.ndarray:
    return np.array([_num(t) for t in text.split()], dtype=float)


def _matrix(text: str) -> np.ndarray:
    rows = [_vector(r) for r in text.split(";") if r.strip()]
    if not rows or len({r.size for r in rows}) != 1:
        raise ValueError("matrix rows must have equal length")
    return np.array(rows)


def parse_schedule(text: str) -> tuple[int, ...]:
    """``"a:b:s"`` (inclusive range) or an explicit list of integers."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("range schedule must be start:stop:step with step > 0")
        return tuple(range(parts[0], parts[1] + 1, parts[2]))
    return tuple(int(t) for t in text.split())


class _Faults:
    """Collects faults as ``section.key: message`` strings (``section:`` for whole sections)."""

    def __init__(self, cp: configparser.ConfigParser):
        self.cp = cp
        self.items: list[str] = []

    def add(self, where: str, msg: str) -> None:
        self.items.append(f"{where}: {msg}")

    def get(self, sec: str, key: str, conv=str, required: bool = True, default=None):
        if not self.cp.has_section(sec):
            return default
        if not self.cp.has_option(sec, key):
            if required:
                self.add(f"{sec}.{key}", "required")
            return default
        raw = self.cp.get(sec, key)
        try:
            return conv(raw)
        except (ValueError, ZeroDivisionError) as exc:
            self.add(f"{sec}.{key}", f"cannot parse {raw!r} ({exc})")
            return default

    def choice(self, sec: str, key: str, options, default=None):
        v = self.get(sec, key, str, required=default is None, default=default)
        if v is not None and v not in options:
            self.add(f"{sec}.{key}", f"must be one of {', '.join(options)}; got {v!r}")
            return None
        return v


def _check_stochastic_columns(f: _Faults, where: str, mat: np.ndarray | None, q: int | None) -> None:
    if mat is None:
        return
    if mat.shape[0] != mat.shape[1]:
        f.add(where, f"matrix must be square, got {mat.shape[0]}x{mat.shape[1]}")
        return
    if q is not None and mat.shape[0] != q:
        f.add(where, f"matrix size {mat.shape[0]} does not match alphabet_size {q}")
    if (mat < 0).any():
        f.add(where, "entries must be nonnegative")
    for j, s in enumerate(mat.sum(axis=0)):
        if abs(s - 1.0) > STOCHASTIC_TOL:
            f.add(where, f"column {j} sums to {s:.12g}, not 1")


def _check_probs(f: _Faults, where: str, p: np.ndarray | None, q: int | None) -> None:
    if p is None:
        return
    if q is not None and p.size != q:
        f.add(where, f"need {q} probabilities, got {p.size}")
    if (p < 0).any() or abs(p.sum() - 1.0) > STOCHASTIC_TOL:
        f.add(where, "probabilities must be nonnegative and sum to 1")


def _bounds(f: _Faults, sec: str, key: str):
    v = f.get(sec, key, _vector)
    if v is not None and (v.size != 2 or not v[0] < v[1]):
        f.add(f"{sec}.{key}", "need two increasing numbers 'low high'")
        return None
    return v


def _parse(text: str):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        return None, [f"line {exc.lineno}: text before the first [section]"]
    except configparser.ParsingError as exc:
        return None, [f"line {ln}: cannot parse {line.strip()!r}" for ln, line in exc.errors]
    except configparser.DuplicateSectionError as exc:
        return None, [f"line {exc.lineno}: duplicate section [{exc.section}]"]
    except configparser.DuplicateOptionError as exc:
        return None, [f"line {exc.lineno}: duplicate key {exc.section}.{exc.option}"]
    except configparser.Error as exc:
        return None, [f"config: {exc}"]
    f = _Faults(cp)
    for sec in ("experiment", "subshift", "family", "prior", "sampling", "loss"):
        if not cp.has_section(sec):
            f.add(sec, "required")

    name = f.get("experiment", "name", default="")
    description = f.get("experiment", "description", required=False, default="")
    seed = f.get("experiment", "seed", int, default=0)
    if seed is not None and not 0 <= seed < 2**64:
        f.add("experiment.seed", "must be an unsigned 64-bit integer")
    replicas = f.get("experiment", "replicas", int, default=1)
    if replicas is not None and replicas < 1:
        f.add("experiment.replicas", "must be >= 1")
    sched = f.get("experiment", "n_schedule", parse_schedule, default=())
    if sched is not None and cp.has_option("experiment", "n_schedule"):
        if not sched:
            f.add("experiment.n_schedule", "empty schedule")
        elif min(sched) < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
            f.add("experiment.n_schedule", "must be strictly increasing positive integers")
    budget = f.get("experiment", "time_budget_s", float, required=False, default=0.0)

    q = f.get("subshift", "alphabet_size", int)
    if q is not None and q < 1:
        f.add("subshift.alphabet_size", "must be >= 1")
        q = None
    trans = f.get("subshift", "transitions", _matrix, required=False)
    if trans is not None:
        if q is not None and trans.shape != (q, q):
            f.add("subshift.transitions", f"must be {q}x{q}")
        if not np.isin(trans, (0.0, 1.0)).all():
            f.add("subshift.transitions", "entries must be 0 or 1")

    fam: dict = {}
    kind = f.choice("family", "kind", FAMILY_KINDS) if cp.has_section("family") else None
    fam["kind"] = kind
    if kind == "markov_2x2":
        fam["a_range"] = _bounds(f, "family", "a_range")
        fam["b_range"] = _bounds(f, "family", "b_range")
        fam["resolution"] = f.get("family", "resolution", int)
        for key in ("a_range", "b_range"):
            r = fam[key]
            if r is not None and (r[0] < 0 or r[1] > 1):
                f.add(f"family.{key}", "must lie inside [0, 1]")
        if q is not None and q != 2:
            f.add("family.kind", "markov_2x2 needs alphabet_size = 2")
    elif kind == "bernoulli_atoms":
        fam["labels"] = f.get("family", "labels", _vector)
        fam["probs"] = f.get("family", "probs", _matrix)
        if fam["labels"] is not None and fam["probs"] is not None:
            if fam["labels"].size != fam["probs"].shape[0]:
                f.add("family.probs", "need one row per label")
            for i, row in enumerate(fam["probs"]):
                _check_probs(f, f"family.probs row {i}", row, q)
    elif kind == "jacobian_mixture":
        fam["t_range"] = _bounds(f, "family", "t_range")
        fam["resolution"] = f.get("family", "resolution", int)
        fam["j0"] = f.get("family", "j0", _matrix)
        fam["j1"] = f.get("family", "j1", _matrix)
        _check_stochastic_columns(f, "family.j0", fam["j0"], q)
        _check_stochastic_columns(f, "family.j1", fam["j1"], q)
        r = fam["t_range"]
        if r is not None and (r[0] < 0 or r[1] > 1):
            f.add("family.t_range", "must lie inside [0, 1]")
    elif kind == "cocycle":
        fam["theta1_range"] = _bounds(f, "family", "theta1_range")
        fam["theta2_range"] = _bounds(f, "family", "theta2_range")
        fam["resolution"] = f.get("family", "resolution", int)
        fam["bias"] = f.get("family", "bias", _num, required=False, default=0.0)
        if q is not None and q != 2:
            f.add("family.kind", "cocycle needs alphabet_size = 2")
    if fam.get("resolution") is not None and fam["resolution"] < 1:
        f.add("family.resolution", "must be >= 1")

    prior: dict = {}
    if cp.has_section("prior"):
        prior["kind"] = f.choice("prior", "kind", ("uniform", "weights"))
        if prior["kind"] == "weights":
            prior["weights"] = f.get("prior", "weights", _vector)
            w = prior["weights"]
            if w is not None and not (w > 0).all():
                f.add("prior.weights", "weights must be positive")

    samp: dict = {}
    if cp.has_section("sampling"):
        samp["kind"] = f.choice("sampling", "kind", SAMPLING_KINDS)
        if samp["kind"] == "node":
            samp["node"] = f.get("sampling", "node", _vector)
        elif samp["kind"] == "bernoulli":
            samp["probs"] = f.get("sampling", "probs", _vector)
            _check_probs(f, "sampling.probs", samp["probs"], q)
        elif samp["kind"] == "markov":
            samp["matrix"] = f.get("sampling", "matrix", _matrix)
            _check_stochastic_columns(f, "sampling.matrix", samp["matrix"], q)

    loss: dict = {}
    if cp.has_section("loss"):
        loss["scheme"] = f.choice("loss", "scheme", SCHEMES)
        loss["samples"] = f.get("loss", "samples", int, required=False, default=1024)
        loss["form"] = f.choice("loss", "form", ("x", "y"), default="x")
        if loss["scheme"] == "exp_almost_additive":
            loss["phi"] = f.choice("loss", "phi", PHI_KINDS)
            if loss["phi"] == "cross_entropy":
                loss["theta0"] = f.get("loss", "theta0", _vector)
                if kind not in (None, "jacobian_mixture", "bernoulli_atoms"):
                    f.add("loss.phi", "cross_entropy needs a one-parameter family")
            if loss["phi"] == "cocycle_norm" and kind not in (None, "cocycle"):
                f.add("loss.phi", "cocycle_norm needs a cocycle family")
        elif loss["scheme"] == "log_almost_additive":
            loss["psi"] = f.choice("loss", "psi", PSI_KINDS)
            if loss["psi"] == "scaled":
                loss["g"] = f.get("loss", "g", _vector)
                loss["noise_bound"] = f.get("loss", "noise_bound", _num, required=False, default=0.0)
            if loss["psi"] == "cocycle_lognorm" and kind not in (None, "cocycle"):
                f.add("loss.psi", "cocycle_lognorm needs a cocycle family")

    rates: dict = {}
    if cp.has_section("rates"):
        rates["theta0"] = f.get("rates", "theta0", _vector)
        rates["deltas"] = f.get("rates", "deltas", _vector)
        rates["zeta"] = f.get("rates", "zeta", _num, required=False, default=0.01)
        d = rates["deltas"]
        if d is not None and not (d > 0).all():
            f.add("rates.deltas", "every delta must be positive")
    lyap: dict = {}
    if cp.has_section("lyapunov"):
        lyap["n_list"] = f.get("lyapunov", "n_list", parse_schedule)
        if kind not in (None, "cocycle"):
            f.add("lyapunov", "only meaningful for a cocycle family")

    if f.items:
        return None, f.items
    cfg = ExperimentConfig(
        name=name,
        description=description,
        seed=seed,
        replicas=replicas,
        n_schedule=tuple(sched),
        time_budget_s=budget,
        alphabet_size=q,
        transitions=trans,
        family=fam,
        prior=prior,
        sampling=samp,
        loss=loss,
        rates=rates,
        lyapunov=lyap,
        text=text,
    )
    return cfg, _semantic_faults(cfg)


def _semantic_faults(cfg: ExperimentConfig) -> list[str]:
    """Checks that need the family to be built: node references and prior sizes."""
    from .experiment import build_family  # local: building pulls in the numerics

    faults: list[str] = []
    try:
        fam, _ = build_family(cfg)
    except Exception as exc:  # the message is the fault
        return [f"family: cannot build ({exc})"]
    nodes = fam.nodes

    def has_node(theta) -> bool:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        return theta.size == nodes.shape[1] and bool(
            (np.abs(nodes - theta).max(axis=1) <= 1e-9).any()
        )

    if cfg.prior.get("kind") == "weights" and cfg.prior["weights"].size != len(fam):
        faults.append(f"prior.weights: need {len(fam)} weights, got {cfg.prior['weights'].size}")
    if cfg.sampling.get("kind") == "node" and not has_node(cfg.sampling["node"]):
        faults.append(f"sampling.node: {cfg.sampling['node'].tolist()} is not a family node")
    if cfg.loss.get("theta0") is not None and not has_node(cfg.loss["theta0"]):
        faults.append(f"loss.theta0: {cfg.loss['theta0'].tolist()} is not a family node")
    if cfg.rates.get("theta0") is not None and not has_node(cfg.rates["theta0"]):
        faults.append(f"rates.theta0: {cfg.rates['theta0'].tolist()} is not a family node")
    if cfg.loss.get("g") is not None and cfg.loss["g"].size != len(fam):
        faults.append(f"loss.g: need {len(fam)} values, got {cfg.loss['g'].size}")
    if cfg.loss.get("g") is not None and not (cfg.loss["g"] > 0).all():
        faults.append("loss.g: values must be positive")
    return faults


def validate_config(text: str) -> list[str]:
    """Every fault in ``text``; the empty list means the config loads."""
    return _parse(text)[1]


def load_config(source: str | Path) -> ExperimentConfig:
    """Load a config from a path or a bundled name; raises :class:`ConfigError` listing all faults."""
    path = Path(source)
    if not path.exists() and str(source) in bundled_configs():
        path = bundled_config_path(str(source))
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"config: cannot read {source} ({exc.strerror})"]) from None
    cfg, faults = _parse(text)
    if faults:
        raise ConfigError(faults)
    return cfg


def bundled_configs() -> list[str]:
    return sorted(p.stem for p in _CONFIG_DIR.glob("*.ini"))


def bundled_config_path(name: str) -> Path:
    path = _CONFIG_DIR / f"{name}.ini"
    if not path.exists():
        raise ConfigError([f"config: no bundled config named {name!r}"])
    return path
