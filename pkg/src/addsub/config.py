"""Run configuration: TOML schema, strict validation, canonical serialization.

One config file describes one model (base + subordinator) plus command
parameters.  Unknown keys are rejected, the schema is validated before any
computation, and ``parse -> serialize -> parse`` is idempotent.  The config
hash identifies the model and command parameters; the seed is carried
separately so reruns with an overridden seed keep the same hash.

Schema::

    [base]
    kind = "factor-mou"            # or "mbm"
    loadings = [1.0, 0.5]          # factor-mou only
    [[base.ou]]                    # one table per idiosyncratic component
    k = 1.0
    theta = 0.0
    sigma = 1.0
    [base.common]                  # optional, defaults to k=1, theta=0, sigma=1
    k = 1.0
    theta = 0.0
    sigma = 1.0
    [[base.blocks]]                # mbm only: loading matrix, drift, covariance
    a = [[1.0], [0.0]]
    mu = [0.0]
    sigma = [[1.0]]

    [subordinator]
    rho = 1.5
    t0 = 0.0
    [[subordinator.components]]
    alpha = 0.5
    beta = 0.5
    lam = 0.39894228040143265

    [run]
    seed = 42
    grid = [0.25, 0.5, 0.75, 1.0]
    n_paths = 100
    xi_grid = [[0.5, 0.0], [0.0, 0.5]]
    t = 1.0
    times = [0.5, 1.0, 2.0]
    state = [0.0, 0.0, 0.0]
    y_grid = [-1.0, -0.5, 0.5, 1.0]
    sampler = "inverse-cdf"
    n_substeps = 16
    [run.tolerances]
    abs = 1e-8
    rel = 1e-8
    cf = 1e-6
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

from .ou_base import BMBlock, FactorMOUSpec, MultiparamBMSpec, OUSpec
from .subordinator import SatoSubordinatorSpec, TemperedStableSpec
from .subordinated import SubordinatedSpec

__all__ = ["RunConfig", "RunParams", "parse_config", "parse_config_text",
           "serialize_config", "config_hash"]


@dataclass(frozen=True)
class RunParams:
    seed: int = 0
    grid: tuple[float, ...] = (1.0,)
    n_paths: int = 1000
    xi_grid: tuple[tuple[float, ...], ...] = ()
    t: float = 1.0
    times: tuple[float, ...] = ()
    state: tuple[float, ...] | None = None
    y_grid: tuple[float, ...] = ()
    sampler: str = "inverse-cdf"
    n_substeps: int = 16
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    cf_tol: float = 1e-6


@dataclass(frozen=True)
class RunConfig:
    spec: SubordinatedSpec
    run: RunParams

    @property
    def base_kind(self) -> str:
        return "mbm" if self.spec.is_levy_base else "factor-mou"


def _reject_unknown(table: dict, allowed: set, where: str):
    unknown = set(table) - allowed
    if unknown:
        raise ValueError(f"unknown key(s) {sorted(unknown)} in [{where}]")


def _number(table, key, where, default=None, required=False):
    if key not in table:
        if required:
            raise ValueError(f"missing required key '{key}' in [{where}]")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"key '{key}' in [{where}] must be a number")
    return float(v)


def _parse_ou(table: dict, where: str) -> OUSpec:
    _reject_unknown(table, {"k", "theta", "sigma"}, where)
    return OUSpec(k=_number(table, "k", where, required=True),
                  theta=_number(table, "theta", where, required=True),
                  sigma=_number(table, "sigma", where, required=True))


def _parse_base(table: dict):
    _reject_unknown(table, {"kind", "loadings", "ou", "common", "blocks"}, "base")
    kind = table.get("kind")
    if kind == "factor-mou":
        if "blocks" in table:
            raise ValueError("[base] kind 'factor-mou' does not take 'blocks'")
        ou_tables = table.get("ou")
        if not isinstance(ou_tables, list) or not ou_tables:
            raise ValueError("[base] needs at least one [[base.ou]] table")
        idio = tuple(_parse_ou(t, f"base.ou[{i}]") for i, t in enumerate(ou_tables))
        loadings = table.get("loadings")
        if not isinstance(loadings, list):
            raise ValueError("[base] 'loadings' must be a list")
        common = _parse_ou(table["common"], "base.common") if "common" in table \
            else OUSpec(1.0, 0.0, 1.0)
        return FactorMOUSpec(idio=idio, loadings=tuple(float(a) for a in loadings),
                             common=common)
    if kind == "mbm":
        if "ou" in table or "loadings" in table or "common" in table:
            raise ValueError("[base] kind 'mbm' takes only 'blocks'")
        blocks_raw = table.get("blocks")
        if not isinstance(blocks_raw, list) or not blocks_raw:
            raise ValueError("[base] needs at least one [[base.blocks]] table")
        blocks = []
        for i, b in enumerate(blocks_raw):
            _reject_unknown(b, {"a", "mu", "sigma"}, f"base.blocks[{i}]")
            blocks.append(BMBlock(np.asarray(b["a"], dtype=float),
                                  np.asarray(b["mu"], dtype=float),
                                  np.asarray(b["sigma"], dtype=float)))
        return MultiparamBMSpec(tuple(blocks))
    raise ValueError("[base] 'kind' must be 'factor-mou' or 'mbm'")


def _parse_subordinator(table: dict) -> SatoSubordinatorSpec:
    _reject_unknown(table, {"rho", "t0", "components"}, "subordinator")
    comps_raw = table.get("components")
    if not isinstance(comps_raw, list) or not comps_raw:
        raise ValueError("[subordinator] needs at least one "
                         "[[subordinator.components]] table")
    comps = []
    for i, c in enumerate(comps_raw):
        where = f"subordinator.components[{i}]"
        _reject_unknown(c, {"alpha", "beta", "lam"}, where)
        comps.append(TemperedStableSpec(
            alpha=_number(c, "alpha", where, required=True),
            beta=_number(c, "beta", where, required=True),
            lam=_number(c, "lam", where, required=True)))
    return SatoSubordinatorSpec(tuple(comps),
                                rho=_number(table, "rho", "subordinator", required=True),
                                t0=_number(table, "t0", "subordinator"))


def _parse_run(table: dict) -> RunParams:
    allowed = {"seed", "grid", "n_paths", "xi_grid", "t", "times", "state",
               "y_grid", "sampler", "n_substeps", "tolerances"}
    _reject_unknown(table, allowed, "run")
    tol = table.get("tolerances", {})
    _reject_unknown(tol, {"abs", "rel", "cf"}, "run.tolerances")
    seed = table.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValueError("[run] 'seed' must be an integer")
    n_paths = table.get("n_paths", 1000)
    if isinstance(n_paths, bool) or not isinstance(n_paths, int) or n_paths < 1:
        raise ValueError("[run] 'n_paths' must be a positive integer")
    n_substeps = table.get("n_substeps", 16)
    if not isinstance(n_substeps, int) or n_substeps < 1:
        raise ValueError("[run] 'n_substeps' must be a positive integer")
    sampler = table.get("sampler", "inverse-cdf")
    if sampler not in ("inverse-cdf", "frozen-levy"):
        raise ValueError("[run] 'sampler' must be 'inverse-cdf' or 'frozen-levy'")
    grid = tuple(float(g) for g in table.get("grid", [1.0]))
    if any(b <= a for a, b in zip(grid, grid[1:])) or not grid:
        raise ValueError("[run] 'grid' must be strictly increasing and non-empty")
    xi_raw = table.get("xi_grid", [])
    xi_grid = tuple(tuple(float(v) for v in (xi if isinstance(xi, list) else [xi]))
                    for xi in xi_raw)
    state = table.get("state")
    return RunParams(
        seed=seed, grid=grid, n_paths=n_paths, xi_grid=xi_grid,
        t=_number(table, "t", "run", default=1.0),
        times=tuple(float(v) for v in table.get("times", [])),
        state=None if state is None else tuple(float(v) for v in state),
        y_grid=tuple(float(v) for v in table.get("y_grid", [])),
        sampler=sampler, n_substeps=n_substeps,
        abs_tol=_number(tol, "abs", "run.tolerances", default=1e-8),
        rel_tol=_number(tol, "rel", "run.tolerances", default=1e-8),
        cf_tol=_number(tol, "cf", "run.tolerances", default=1e-6))


def parse_config_text(text: str) -> RunConfig:
    data = _toml.loads(text)
    _reject_unknown(data, {"base", "subordinator", "run"}, "<root>")
    for section in ("base", "subordinator"):
        if section not in data:
            raise ValueError(f"missing required section [{section}]")
    base = _parse_base(data["base"])
    sub = _parse_subordinator(data["subordinator"])
    run = _parse_run(data.get("run", {}))
    if run.state is not None and not isinstance(base, MultiparamBMSpec):
        if len(run.state) != base.d + 1:
            raise ValueError(f"[run] 'state' must have d+1 = {base.d + 1} entries")
    for xi in run.xi_grid:
        if len(xi) != base.d:
            raise ValueError(f"[run] xi_grid entries must have length d = {base.d}")
    return RunConfig(SubordinatedSpec(base, sub), run)


def parse_config(path: str) -> RunConfig:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return parse_config_text(text)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def serialize_config(cfg: RunConfig) -> str:
    """Canonical TOML text of a config (fixed key order, round-trip floats)."""
    out = ["[base]"]
    if cfg.base_kind == "factor-mou":
        base = cfg.spec.base
        out.append('kind = "factor-mou"')
        out.append(f"loadings = {_fmt(list(base.loadings))}")
        for ou in base.idio:
            out += ["", "[[base.ou]]", f"k = {_fmt(ou.k)}",
                    f"theta = {_fmt(ou.theta)}", f"sigma = {_fmt(ou.sigma)}"]
        c = base.common
        out += ["", "[base.common]", f"k = {_fmt(c.k)}",
                f"theta = {_fmt(c.theta)}", f"sigma = {_fmt(c.sigma)}"]
    else:
        out.append('kind = "mbm"')
        for blk in cfg.spec.base.blocks:
            out += ["", "[[base.blocks]]",
                    f"a = {_fmt([list(r) for r in blk.A])}",
                    f"mu = {_fmt(list(blk.mu))}",
                    f"sigma = {_fmt([list(r) for r in blk.Sigma])}"]
    sub = cfg.spec.sub
    out += ["", "[subordinator]", f"rho = {_fmt(sub.rho)}", f"t0 = {_fmt(sub.t0)}"]
    for comp in sub.components:
        out += ["", "[[subordinator.components]]", f"alpha = {_fmt(comp.alpha)}",
                f"beta = {_fmt(comp.beta)}", f"lam = {_fmt(comp.lam)}"]
    r = cfg.run
    out += ["", "[run]", f"seed = {r.seed}", f"grid = {_fmt(list(r.grid))}",
            f"n_paths = {r.n_paths}"]
    if r.xi_grid:
        out.append(f"xi_grid = {_fmt([list(x) for x in r.xi_grid])}")
    out.append(f"t = {_fmt(r.t)}")
    if r.times:
        out.append(f"times = {_fmt(list(r.times))}")
    if r.state is not None:
        out.append(f"state = {_fmt(list(r.state))}")
    if r.y_grid:
        out.append(f"y_grid = {_fmt(list(r.y_grid))}")
    out += [f'sampler = "{r.sampler}"', f"n_substeps = {r.n_substeps}", "",
            "[run.tolerances]", f"abs = {_fmt(r.abs_tol)}",
            f"rel = {_fmt(r.rel_tol)}", f"cf = {_fmt(r.cf_tol)}"]
    return "\n".join(out) + "\n"


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical serialization with the seed zeroed out, so a
    seed override changes the provenance pair (hash, seed) but not the hash."""
    canon = serialize_config(
        RunConfig(cfg.spec, RunParams(**{**cfg.run.__dict__, "seed": 0})))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]
