"""Config-driven front end: build modules, assemble R, run the verifiers, write JSON reports.

Config files are plain ``key = value`` lines; ``#`` starts a comment. Lists
are comma separated. Example::

    type_label = A1
    N = 3
    lambda_exponents = 1, 2, 0
    mu_exponents = 2, 1, 0
    ell_list = 1, 3
    commands = build, rmatrix, verify-intertwine

Exit status: 0 when every requested verification passes, 1 when one fails
(reports are still written), 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import pickle
import sys
import time
from importlib import resources
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .asympt import convergence_order_test, t_ladder
from .qfield import InadmissibleOrder, check_admissible
from .rmatrix import (VARIANTS, TensorSetup, VariantMismatch, assemble_R, compare_with_oracle,
                      verify_intertwining, verify_ybe)
from .rootdata import UnsupportedType, affine_cartan
from .rootvec import kostant_partitions, pbw_span_check
from .specialize import (IntegralFrame, braided_at_eps, certify_pole_free, check_central_powers,
                         poisson_checks)
from .verma import relation_residuals

log = logging.getLogger("affine_rmatrix")

SCHEMA_VERSION = "1.0.0"
CACHE_ENV = "AFFINE_RMATRIX_CACHE"
COMMANDS = ("build", "rmatrix", "verify-intertwine", "verify-ybe", "specialize", "centrality",
            "poisson", "asymptotics")


def report_schema_version() -> str:
    return SCHEMA_VERSION


def report_schema() -> dict:
    """The published JSON schema every report validates against."""
    return json.loads(resources.files(__package__).joinpath("schemas/report.schema.json").read_text())


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config
def _int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"expected an integer, got {s!r}") from None


def _ints(s: str) -> list[int]:
    return [_int(p.strip()) for p in s.split(",") if p.strip()]


def _words(s: str) -> list[str]:
    return [p.strip() for p in s.split(",") if p.strip()]


def _cases(s: str) -> list[list[float]]:
    # "0.3:1, 0.2:3" -> [[0.3, 1], [0.2, 3]]
    out = []
    for part in _words(s):
        try:
            z, ell = part.split(":")
            out.append([float(z), int(ell)])
        except ValueError:
            raise ConfigError(f"asymptotic case {part!r} should look like z:ell") from None
    return out


# key -> (parser, default); a default of ... marks a required key
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "type_label": (str, "A1"),
    "N": (_int, ...),
    "lambda_exponents": (_ints, ...),
    "mu_exponents": (_ints, None),
    "nu_exponents": (_ints, None),
    "ell_list": (_ints, [1, 3]),
    "variant": (str, "both"),
    "commands": (_words, ["build"]),
    "output": (str, "reports"),
    "order": (str, "default"),
    "N_ybe": (_int, None),
    "box": (_ints, None),
    "asymptotic_cases": (_cases, [[0.3, 1], [0.2, 3]]),
    "asymptotic_rhs": (str, "stated"),
    "t_start": (float, 1e-2),
    "t_count": (_int, 5),
}


@dataclass
class RunConfig:
    N: int
    lambda_exponents: list[int]
    type_label: str = "A1"
    mu_exponents: list[int] | None = None
    nu_exponents: list[int] | None = None
    ell_list: list[int] = field(default_factory=lambda: [1, 3])
    variant: str = "both"
    commands: list[str] = field(default_factory=lambda: ["build"])
    output: str = "reports"
    order: str = "default"
    N_ybe: int | None = None
    box: list[int] | None = None
    asymptotic_cases: list[list[float]] = field(default_factory=lambda: [[0.3, 1], [0.2, 3]])
    asymptotic_rhs: str = "stated"
    t_start: float = 1e-2
    t_count: int = 5

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.N < 0:
            raise ConfigError("N must be >= 0")
        try:
            cartan = affine_cartan(self.type_label)
        except (UnsupportedType, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        for key in ("lambda_exponents", "mu_exponents", "nu_exponents"):
            v = getattr(self, key)
            if v is not None and len(v) != cartan.rank_inf:
                raise ConfigError(f"{key} needs {cartan.rank_inf} entries, got {len(v)}")
        for ell in self.ell_list:
            try:
                check_admissible(ell, self.type_label)
            except InadmissibleOrder as exc:
                raise ConfigError(f"inadmissible order: {exc}") from None
        if self.variant not in VARIANTS + ("both",):
            raise ConfigError(f"variant must be one of {VARIANTS + ('both',)}")
        bad = [c for c in self.commands if c not in COMMANDS]
        if bad:
            raise ConfigError(f"unknown commands {bad}")
        if self.order not in ("default", "reverse"):
            raise ConfigError("order must be 'default' or 'reverse'")
        if self.asymptotic_rhs not in ("stated", "corrected"):
            raise ConfigError("asymptotic_rhs must be 'stated' or 'corrected'")
        if self.N_ybe is not None and self.N_ybe < 0:
            raise ConfigError("N_ybe must be >= 0")
        for _, ell in self.asymptotic_cases:
            if ell < 1:
                raise ConfigError("asymptotic ell must be >= 1")

    @property
    def weights(self) -> list[tuple[int, ...]]:
        lam = tuple(self.lambda_exponents)
        mu = tuple(self.mu_exponents) if self.mu_exponents is not None else lam
        nu = tuple(self.nu_exponents) if self.nu_exponents is not None else lam
        return [lam, mu, nu]

    @property
    def ybe_height(self) -> int:
        return min(self.N, 3) if self.N_ybe is None else self.N_ybe


def parse_config_text(text: str) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = SCHEMA[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    missing = [k for k, (_, d) in SCHEMA.items() if d is ... and k not in values]
    if missing:
        raise ConfigError(f"missing required keys {missing}")
    return values


def load_config(path: str | os.PathLike) -> RunConfig:
    return RunConfig(**parse_config_text(Path(path).read_text()))


# ---------------------------------------------------------------- cache
def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "affine_rmatrix"


def _cache_key(kind: str, payload: dict) -> str:
    blob = json.dumps({"kind": kind, "version": __version__, **payload}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def cached(kind: str, payload: dict, build: Callable[[], Any]):
    path = cache_dir() / f"{kind}-{_cache_key(kind, payload)[:32]}.pkl"
    if path.exists():
        try:
            with path.open("rb") as fh:
                return pickle.load(fh)
        except Exception as exc:  # stale or truncated entry, rebuild
            log.warning("ignoring cache entry %s: %s", path, exc)
    obj = build()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with tmp.open("wb") as fh:
            pickle.dump(obj, fh, protocol=pickle.HIGHEST_PROTOCOL)
        tmp.replace(path)
    except OSError as exc:
        log.warning("could not write cache %s: %s", path, exc)
    return obj


def _setup_payload(cfg: RunConfig, weights, N: int, box=None) -> dict:
    return {"type_label": cfg.type_label, "N": N, "weights": [list(w) for w in weights],
            "order": cfg.order, "box": list(box) if box else None}


def _setup(cfg: RunConfig, weights, N: int) -> TensorSetup:
    def build():
        setup = TensorSetup(affine_cartan(cfg.type_label), weights, N, box=cfg.box, order=cfg.order)
        for leg in range(len(weights)):
            setup.rootvecs(leg)
        return setup
    return cached("setup", _setup_payload(cfg, weights, N, cfg.box), build)


def _pair_R(cfg: RunConfig):
    # setup and R are pickled together so the operators keep sharing one space object
    variant = "E_Fdot" if cfg.variant == "both" else cfg.variant

    def build():
        setup = TensorSetup(affine_cartan(cfg.type_label), cfg.weights[:2], cfg.N, box=cfg.box, order=cfg.order)
        return setup, assemble_R(setup, variant)
    return cached("rmatrix", {**_setup_payload(cfg, cfg.weights[:2], cfg.N, cfg.box), "variant": variant}, build)


# ---------------------------------------------------------------- commands
def _digest(op) -> str:
    h = hashlib.sha256()
    h.update(str(op.prefactor).encode())
    for z, i, j, x in sorted(op.entries(), key=lambda e: (e[0], e[1], e[2])):
        h.update(f"{list(z)}|{i}|{j}|{x.to_string()};".encode())
    return h.hexdigest()


def cmd_build(cfg: RunConfig, jobs: int) -> dict:
    cartan = affine_cartan(cfg.type_label)
    roots = cartan.positive_roots_up_to(max(cfg.N, 1), order=cfg.order)
    modules = []
    ok = True
    seen = []
    for w in cfg.weights:
        if w in seen:
            continue
        seen.append(w)
        mod = _setup(cfg, [w], cfg.N).modules[0]
        by_height: dict[str, int] = {}
        degrees = []
        for eta, basis in sorted(mod.components.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            h = str(sum(eta))
            by_height[h] = by_height.get(h, 0) + len(basis)
            kp = len(kostant_partitions(roots, eta))
            degrees.append({"degree": list(eta), "dimension": len(basis), "kostant": kp})
            ok = ok and kp == len(basis)
        rels = relation_residuals(mod)
        rel_ok = all(not v for v in rels.values())
        ok = ok and rel_ok
        modules.append({"weight": list(w), "dimensions": by_height, "degrees": degrees,
                        "relations": {k: [list(map(list, x)) if isinstance(x, tuple) else x for x in v]
                                      for k, v in rels.items()},
                        "relations_ok": rel_ok})
    return {"ok": ok, "modules": modules,
            "roots": [rt.to_json() | {"label": rt.label} for rt in roots if rt.height <= cfg.N]}


def cmd_rmatrix(cfg: RunConfig, jobs: int) -> dict:
    start = time.perf_counter()
    setup, fact = _pair_R(cfg)
    out: dict[str, Any] = {"variant": cfg.variant, "product_ok": fact.check_product(),
                           "factors": [rt.label for rt, _ in fact.factors],
                           "digest": _digest(fact.assembled), "prefactor": str(fact.assembled.prefactor)}
    ok = out["product_ok"]
    if cfg.variant == "both":
        try:
            assemble_R(setup, "both")
            out["variants_agree"] = True
        except VariantMismatch as exc:
            out["variants_agree"] = False
            out["variant_error"] = str(exc)
            ok = False
    spans = [pbw_span_check(setup.rootvecs(leg)) for leg in range(2)]
    out["pbw_span"] = [{"ok": s["ok"], "failing": [list(z) for z in s["failing"]]} for s in spans]
    ok = ok and all(s["ok"] for s in spans)
    if cfg.box is None:
        oracle = compare_with_oracle(setup, fact)
        oracle.pop("valid_bidegrees", None)
        out["oracle"] = oracle
        ok = ok and oracle["ok"]
    out["ok"] = ok
    out["elapsed"] = round(time.perf_counter() - start, 6)
    return out


def cmd_verify_intertwine(cfg: RunConfig, jobs: int) -> dict:
    setup, fact = _pair_R(cfg)
    return verify_intertwining(setup, fact)


def cmd_verify_ybe(cfg: RunConfig, jobs: int) -> dict:
    n = cfg.ybe_height
    setup = _setup(cfg, cfg.weights, n) if cfg.box is None else TensorSetup(
        affine_cartan(cfg.type_label), cfg.weights, n, order=cfg.order)
    rep = verify_ybe(setup.cartan, cfg.weights, n, setup=setup)
    rep["N"] = n
    return rep


def _specialize_one(cfg: RunConfig, ell: int) -> dict:
    setup, fact = _pair_R(cfg)
    cert = certify_pole_free(IntegralFrame(setup).to_integral(fact.assembled), ell)
    entry: dict[str, Any] = {"ell": ell, "pole_free": cert}
    if cert["ok"]:
        entry["braiding"] = braided_at_eps(ell, setup.cartan, cfg.weights, cfg.N, N_ybe=cfg.ybe_height)
        entry["ok"] = entry["braiding"]["ok"]
    else:
        entry["ok"] = False
    return entry


def _centrality_one(cfg: RunConfig, ell: int) -> dict:
    setup = _setup(cfg, cfg.weights[:1], cfg.N)
    rep = check_central_powers(setup, ell)
    if not rep["checks"]:
        # no ell-th power of a root vector fits under the truncation
        rep["ok"] = True
        rep["skipped"] = f"no root of height <= {cfg.N // ell} to raise to the power {ell}"
    return rep


def _map(fn, cfg: RunConfig, items, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, [cfg] * len(items), items))
    return [fn(cfg, x) for x in items]


def cmd_specialize(cfg: RunConfig, jobs: int) -> dict:
    results = _map(_specialize_one, cfg, cfg.ell_list, jobs)
    return {"ok": all(r["ok"] for r in results), "results": results}


def cmd_centrality(cfg: RunConfig, jobs: int) -> dict:
    results = _map(_centrality_one, cfg, cfg.ell_list, jobs)
    return {"ok": all(r["ok"] for r in results), "results": results}


def cmd_poisson(cfg: RunConfig, jobs: int) -> dict:
    return poisson_checks(_setup(cfg, cfg.weights[:1], cfg.N))


def _asym_one(cfg: RunConfig, case) -> dict:
    z, ell = case
    return convergence_order_test(z, int(ell), t_ladder(cfg.t_start, cfg.t_count), rhs=cfg.asymptotic_rhs)


def cmd_asymptotics(cfg: RunConfig, jobs: int) -> dict:
    results = _map(_asym_one, cfg, cfg.asymptotic_cases, jobs)
    return {"ok": all(r["ok"] for r in results), "rhs": cfg.asymptotic_rhs, "results": results}


HANDLERS: dict[str, Callable[[RunConfig, int], dict]] = {
    "build": cmd_build,
    "rmatrix": cmd_rmatrix,
    "verify-intertwine": cmd_verify_intertwine,
    "verify-ybe": cmd_verify_ybe,
    "specialize": cmd_specialize,
    "centrality": cmd_centrality,
    "poisson": cmd_poisson,
    "asymptotics": cmd_asymptotics,
}


# ---------------------------------------------------------------- driver
def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


def run(cfg: RunConfig, jobs: int = 1) -> tuple[int, dict[str, dict]]:
    """Run the configured commands in dependency order, write reports, return (status, reports)."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    requested = [c for c in COMMANDS if c in cfg.commands]
    cfg_dump = asdict(cfg)
    cfg_dump.pop("output")
    reports = {}
    status = 0
    for name in requested:
        start = time.perf_counter()
        log.info("running %s", name)
        body = HANDLERS[name](cfg, jobs)
        body.pop("R", None)
        rep = {"schema_version": SCHEMA_VERSION, "command": name, "ok": bool(body.get("ok")),
               "config": cfg_dump, "result": body, "timing": round(time.perf_counter() - start, 6)}
        rep = _jsonable(rep)
        (out / f"{name}.json").write_text(json.dumps(rep, sort_keys=True, indent=2) + "\n")
        reports[name] = rep
        if not rep["ok"]:
            status = 1
        log.info("%s: %s", name, "pass" if rep["ok"] else "FAIL")
    return status, reports


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="affine-rmatrix", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--command", action="append", choices=COMMANDS,
                   help="command to run (repeatable, overrides the config)")
    p.add_argument("--out", help="report directory (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for per-order work")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} (reports {SCHEMA_VERSION})")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        values = parse_config_text(Path(args.config).read_text())
        if args.command:
            values["commands"] = args.command
        if args.out:
            values["output"] = args.out
        cfg = RunConfig(**values)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status, reports = run(cfg, args.jobs)
    for name, rep in reports.items():
        print(f"{name}: {'pass' if rep['ok'] else 'FAIL'}")
    return status


if __name__ == "__main__":
    sys.exit(main())
