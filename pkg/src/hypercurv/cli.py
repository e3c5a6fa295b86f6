"""Command-line front end.

    hypercurv solve [--config FILE] [--psi EXPR] [--out DIR] ...
    hypercurv check-psi --psi EXPR ...
    hypercurv verify-identities [--seed N]
    hypercurv compare A.csv B.csv

Settings come from an INI file (sections ``[run]`` and ``[solver]``) and are
overridden by command-line flags.  Exit codes: 0 success, 1 verification
mismatch, 2 configuration error, 3 psi conditions failed, 4 solver failure.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, GridMismatch, PsiConditionsFailed, PsiExpressionError, SolverError
from .grid import build_grid
from .identities import run_all
from .psi import PsiSpec, check_conditions
from .reporting import read_solution_csv, write_json, write_solution_csv
from .samples import MANUFACTURED_Z, manufactured_psi
from .solver import SolverConfig, continuation_solve
from .verify import fit_scaling_constant

__all__ = ["RunConfig", "load_config", "run", "main", "build_parser"]

log = logging.getLogger("hypercurv")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_PSI = 3
EXIT_SOLVER = 4

MODES = ("solve", "check-psi", "verify-identities", "compare")

# SolverConfig fields that may appear in the [solver] section
_SOLVER_KEYS = {
    f.name: f.type
    for f in dataclasses.fields(SolverConfig)
    if f.name not in ("m", "initial_guess")
}


@dataclass
class RunConfig:
    mode: str
    K: int = -1
    n: int = 1
    m: int = 1
    R1: float = 0.8
    R2: float = 1.6
    resolution: int = 256
    psi: str | None = None
    manufactured: str | None = None  # z* expression; used when psi is not given
    solver: dict = field(default_factory=dict)
    out: Path = Path(".")
    seed: int = 0
    strict_psi: bool = True
    inputs: tuple = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.K not in (-1, 1):
            raise ConfigError(f"K must be -1 or 1, got {self.K}")
        if self.n not in (1, 2):
            raise ConfigError(f"n must be 1 or 2, got {self.n}")
        if not 1 <= self.m <= self.n:
            raise ConfigError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.mode == "compare" and len(self.inputs) != 2:
            raise ConfigError("compare needs exactly two solution files")
        if self.mode in ("solve", "check-psi") and self.psi is None and self.manufactured is None:
            if (self.n, self.m) == (1, 1):
                self.manufactured = MANUFACTURED_Z
            else:
                raise ConfigError(f"mode {self.mode} needs a psi expression")

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "K": self.K,
            "n": self.n,
            "m": self.m,
            "R1": self.R1,
            "R2": self.R2,
            "resolution": self.resolution,
            "psi": self.psi,
            "manufactured": self.manufactured,
            "seed": self.seed,
            "strict_psi": self.strict_psi,
            "solver": dict(sorted(self.solver.items())),
        }


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _coerce(key: str, kind, text: str):
    kind = str(kind)
    try:
        if "bool" in kind:
            return _parse_bool(text)
        if "int" in kind and "float" not in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc
    return text.strip()


_RUN_KEYS = {"K": int, "n": int, "m": int, "R1": float, "R2": float, "resolution": int, "psi": str, "manufactured": str, "seed": int, "strict_psi": bool, "out": str}


def load_config(path) -> dict:
    """Read an INI file into a flat dict of run keys plus a ``solver`` dict."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep K, R1, R2 case
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out: dict = {"solver": {}}
    unknown = set(parser.sections()) - {"run", "solver"}
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    if parser.has_section("run"):
        for key, text in parser.items("run"):
            if key not in _RUN_KEYS:
                raise ConfigError(f"unknown [run] key {key!r}")
            out[key] = _coerce(key, _RUN_KEYS[key].__name__, text)
    if parser.has_section("solver"):
        for key, text in parser.items("solver"):
            if key not in _SOLVER_KEYS:
                raise ConfigError(f"unknown [solver] key {key!r}")
            out["solver"][key] = _coerce(key, _SOLVER_KEYS[key], text)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypercurv", description="Prescribed m-th mean curvature radial graphs in space forms.")
    sub = p.add_subparsers(dest="mode", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [run] and [solver] sections")
    common.add_argument("--out", type=Path, help="output directory (default: current directory)")
    common.add_argument("--resolution", type=int, help="nodes on S^1, or latitude rings on S^2")
    common.add_argument("--m", type=int, help="curvature order")
    common.add_argument("--n", type=int, help="sphere dimension (1 or 2)")
    common.add_argument("--K", type=int, choices=(-1, 1), help="sectional curvature of the space form")
    common.add_argument("--R1", type=float, help="inner barrier radius")
    common.add_argument("--R2", type=float, help="outer barrier radius")
    common.add_argument("--psi", help="psi(rho, theta[, phi]) as an expression")
    common.add_argument("--seed", type=int)
    common.add_argument("--strict-psi", dest="strict_psi", type=_parse_bool, metavar="{true,false}", help="stop with exit 3 when psi fails its conditions")
    common.add_argument("-v", "--verbose", action="store_true")
    for mode in MODES[:3]:
        sub.add_parser(mode, parents=[common])
    cmp = sub.add_parser("compare", parents=[common])
    cmp.add_argument("inputs", nargs=2, type=Path, metavar="SOLUTION_CSV")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = load_config(args.config) if args.config else {"solver": {}}
    for key in ("K", "n", "m", "R1", "R2", "resolution", "psi", "seed", "strict_psi", "out"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if values.get("psi") is not None:
        values.pop("manufactured", None)
    values["out"] = Path(values.get("out", "."))
    values["inputs"] = tuple(getattr(args, "inputs", ()) or ())
    return RunConfig(mode=args.mode, **values)


def _psi_from(cfg: RunConfig) -> PsiSpec:
    try:
        if cfg.psi is not None:
            return PsiSpec.from_string(cfg.psi, cfg.R1, cfg.R2, cfg.m, cfg.n, cfg.K)
        return manufactured_psi(cfg.manufactured, cfg.n, cfg.m, cfg.R1, cfg.R2, cfg.K)
    except (PsiExpressionError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _solver_config(cfg: RunConfig) -> SolverConfig:
    try:
        return SolverConfig(m=cfg.m, require_conditions=cfg.strict_psi, **cfg.solver)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver settings: {exc}") from exc


def _grid(cfg: RunConfig):
    try:
        return build_grid(cfg.n, cfg.resolution)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _run_solve(cfg: RunConfig) -> int:
    psi = _psi_from(cfg)
    grid = _grid(cfg)
    scfg = _solver_config(cfg)
    cond = check_conditions(psi, grid)
    write_json(cfg.out / "conditions.json", cond.as_dict())
    if not cond.all_ok:
        if cfg.strict_psi:
            log.error("psi fails its conditions; see conditions.json")
            return EXIT_PSI
        log.warning("psi fails its conditions; solving anyway")
    try:
        graph, report = continuation_solve(psi, scfg, grid)
    except PsiConditionsFailed:
        return EXIT_PSI
    except SolverError as exc:
        log.error("solver failed: %s", exc)
        write_json(cfg.out / "report.json", {"config": cfg.as_dict(), "report": exc.report.as_dict(timing=False)})
        return EXIT_SOLVER
    log.info("solved in %.3f s", report.wall_time)
    write_solution_csv(cfg.out / "solution.csv", graph, psi, cfg.m)
    write_json(cfg.out / "report.json", {"config": cfg.as_dict(), "report": report.as_dict(timing=False)})
    return EXIT_OK if report.converged else EXIT_SOLVER


def _run_check(cfg: RunConfig) -> int:
    psi = _psi_from(cfg)
    cond = check_conditions(psi, _grid(cfg))
    write_json(cfg.out / "conditions.json", {"config": cfg.as_dict(), "all_ok": cond.all_ok, **cond.as_dict()})
    if not cond.all_ok and cfg.strict_psi:
        return EXIT_PSI
    return EXIT_OK


def _run_identities(cfg: RunConfig) -> int:
    result = run_all(seed=cfg.seed)
    write_json(cfg.out / "identities.json", result)
    for name, suite in result["suites"].items():
        log.info("%-16s %s", name, "pass" if suite["passed"] else "FAIL")
    return EXIT_OK if result["passed"] else EXIT_MISMATCH


def _run_compare(cfg: RunConfig) -> int:
    try:
        z1, z2 = (read_solution_csv(p, cfg.K) for p in cfg.inputs)
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    tol = cfg.solver.get("newton_tol")
    fit = fit_scaling_constant(z1, z2, None if tol is None else 10.0 * tol)
    write_json(cfg.out / "scaling.json", {"inputs": [str(p) for p in cfg.inputs], **fit.as_dict()})
    return EXIT_OK if fit.related else EXIT_MISMATCH


_HANDLERS = {"solve": _run_solve, "check-psi": _run_check, "verify-identities": _run_identities, "compare": _run_compare}


def run(cfg: RunConfig) -> int:
    """Execute one mode and return its exit code."""
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {cfg.out}: {exc}") from exc
    return _HANDLERS[cfg.mode](cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    tic = time.perf_counter()
    try:
        code = run(config_from_args(args))
    except ConfigError as exc:
        print(f"hypercurv: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GridMismatch as exc:
        print(f"hypercurv: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("%s finished in %.2f s (exit %d)", args.mode, time.perf_counter() - tic, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
