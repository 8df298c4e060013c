"""Run configuration files.

A run is described by a single INI-style file (flat key = value pairs
grouped in sections) so that every calibration or simulation is fully
reproducible from the file plus its seed. Unknown sections, unknown keys,
and unsupported versions are rejected loudly.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from pathlib import Path

from .calibration import CalibrationSettings
from .engine import RuleKind, TestConfig
from .irt import DEFAULT_CLAMP, ItemPool
from .pools import read_pool_csv, synthetic_pool
from .selection import ContentConstraints, SelectionRule
from .stopping import Hypotheses, Thresholds, tsprt_truncation_cutoff, wald_thresholds

CONFIG_VERSION = 1

_SECTION_KEYS = {
    "run": {"version", "seed", "workers", "out_dir"},
    "pool": {"source", "synthetic_size", "synthetic_seed", "synthetic_categories"},
    "hypotheses": {"theta_cut", "theta_plus", "theta_minus", "alpha", "beta", "theta_implied"},
    "test": {"max_length", "min_stage", "selection", "clamp", "kl_offset"},
    "content": {"proportions", "exposure_cap"},
    "calibration": {"replications", "epsilon", "prob_tol", "x_tol", "method", "report"},
    "simulate": {"replications", "report", "figures", "theta_grid"},
}
_RULE_KEYS = {"kind", "alpha", "beta", "reject_bound", "accept_bound", "terminal_cutoff",
              "llr_reference"}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


@dataclass
class RuleSpec:
    name: str
    kind: RuleKind
    alpha: float | None = None
    beta: float | None = None
    reject_bound: float | None = None
    accept_bound: float | None = None
    terminal_cutoff: float | None = None
    llr_reference: str = "theta_minus"


@dataclass
class RunConfig:
    path: Path
    seed: int
    workers: int
    out_dir: Path
    pool_source: Path | None
    synthetic: tuple[int, int, int | None] | None   # (size, seed, categories)
    hypotheses: Hypotheses
    max_length: int
    min_stage: int
    selection: SelectionRule
    clamp: tuple[float, float]
    kl_offset: float | None
    constraints: ContentConstraints | None
    calibration: CalibrationSettings
    calibration_method: str
    calibration_report_path: Path
    sim_replications: int
    sim_report_path: Path
    figures: bool
    theta_grid: list[float] | None
    rules: list[RuleSpec]

    def load_pool(self) -> ItemPool:
        if self.pool_source is not None:
            return read_pool_csv(self.pool_source)
        size, seed, categories = self.synthetic
        return synthetic_pool(size, seed, categories=categories)

    def pool_descriptor(self) -> str:
        if self.pool_source is not None:
            return str(self.pool_source)
        size, seed, categories = self.synthetic
        return f"synthetic(size={size}, seed={seed}, categories={categories})"

    def build_test_configs(self, calibration_report: dict | None = None) -> list[TestConfig]:
        """Turn the rule blocks into runnable test configurations.

        Thresholds missing from a rule block are pulled from the
        calibration report; hypotheses gain the implied alternative the
        same way.
        """
        hyps = self.hypotheses
        if hyps.theta_implied is None and calibration_report is not None:
            hyps = hyps.with_implied(float(calibration_report["theta_implied"]))

        def need(value, rule_name: str, key: str, description: str):
            if value is None:
                raise ConfigError(
                    f"rule {rule_name!r} needs {description}; set {key} in its block "
                    "or point [calibration] report at an existing calibration")
            return float(value)

        def from_report(*keys):
            node = calibration_report
            for key in keys:
                if node is None:
                    return None
                node = node.get(key)
            return node

        configs = []
        for spec in self.rules:
            alpha = spec.alpha if spec.alpha is not None else hyps.alpha
            beta = spec.beta if spec.beta is not None else hyps.beta
            if spec.kind is RuleKind.FIXED:
                if spec.terminal_cutoff is not None:
                    cutoff = spec.terminal_cutoff
                elif spec.llr_reference == "theta_minus":
                    cutoff = from_report("fixed_cutoff_minus")
                else:
                    cutoff = from_report("fixed_cutoff_implied")
                thresholds = Thresholds(
                    max_length=self.max_length,
                    terminal_cutoff=need(cutoff, spec.name, "terminal_cutoff",
                                         "a terminal cutoff"))
            elif spec.kind is RuleKind.MOD_HP:
                rb = spec.reject_bound if spec.reject_bound is not None \
                    else from_report("thresholds", "reject_bound")
                ab = spec.accept_bound if spec.accept_bound is not None \
                    else from_report("thresholds", "accept_bound")
                tc = spec.terminal_cutoff if spec.terminal_cutoff is not None \
                    else from_report("thresholds", "terminal_cutoff")
                thresholds = Thresholds(
                    max_length=self.max_length,
                    terminal_cutoff=need(tc, spec.name, "terminal_cutoff", "a terminal cutoff"),
                    reject_bound=need(rb, spec.name, "reject_bound", "a reject bound"),
                    accept_bound=need(ab, spec.name, "accept_bound", "an accept bound"),
                    min_stage=self.min_stage)
            else:
                wald_rb, wald_ab = wald_thresholds(alpha, beta)
                rb = spec.reject_bound if spec.reject_bound is not None else wald_rb
                ab = spec.accept_bound if spec.accept_bound is not None else wald_ab
                if spec.terminal_cutoff is not None:
                    tc = spec.terminal_cutoff
                elif spec.kind is RuleKind.MOD_TSPRT:
                    tc = need(from_report("tsprt_cutoff"), spec.name, "terminal_cutoff",
                              "a calibrated truncation cutoff")
                else:
                    tc = tsprt_truncation_cutoff(rb, ab)
                thresholds = Thresholds(max_length=self.max_length, terminal_cutoff=float(tc),
                                        reject_bound=float(rb), accept_bound=float(ab))
            configs.append(TestConfig(
                kind=spec.kind, hypotheses=hyps, thresholds=thresholds,
                selection=self.selection, constraints=self.constraints, clamp=self.clamp,
                kl_offset=self.kl_offset, fixed_llr_reference=spec.llr_reference,
                name=spec.name))
        return configs


def _check_keys(parser: configparser.ConfigParser, path: Path) -> None:
    for section in parser.sections():
        if section.startswith("rule:"):
            allowed = _RULE_KEYS
        elif section in _SECTION_KEYS:
            allowed = _SECTION_KEYS[section]
        else:
            raise ConfigError(f"{path}: unknown section [{section}]")
        unknown = set(parser[section]) - allowed
        if unknown:
            raise ConfigError(
                f"{path}: unknown key(s) {sorted(unknown)} in [{section}]; "
                f"allowed: {sorted(allowed)}")


def load_run_config(path, seed_override: int | None = None,
                    workers_override: int | None = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    _check_keys(parser, path)
    base = path.resolve().parent

    run = parser["run"] if parser.has_section("run") else {}
    version = int(run.get("version", "0"))
    if version != CONFIG_VERSION:
        raise ConfigError(f"{path}: unsupported config version {version}, "
                          f"this build reads version {CONFIG_VERSION}")
    seed = seed_override
    if seed is None:
        if "seed" not in run:
            raise ConfigError(f"{path}: [run] seed is mandatory (pass --seed to override)")
        seed = int(run["seed"])
    if seed < 0:
        raise ConfigError(f"{path}: seed must be nonnegative, got {seed}")
    workers = workers_override if workers_override is not None \
        else int(run.get("workers", str(os.cpu_count() or 1)))
    if workers < 1:
        raise ConfigError(f"{path}: workers must be at least 1, got {workers}")
    out_dir = base / run.get("out_dir", ".")

    if not parser.has_section("pool"):
        raise ConfigError(f"{path}: missing [pool] section")
    pool_sec = parser["pool"]
    pool_source = None
    synthetic = None
    if "source" in pool_sec:
        pool_source = base / pool_sec["source"]
        if not pool_source.is_file():
            raise ConfigError(f"{path}: pool source does not exist: {pool_source}")
    elif "synthetic_size" in pool_sec:
        synthetic = (int(pool_sec["synthetic_size"]),
                     int(pool_sec.get("synthetic_seed", str(seed))),
                     int(pool_sec["synthetic_categories"])
                     if "synthetic_categories" in pool_sec else None)
    else:
        raise ConfigError(f"{path}: [pool] needs either source or synthetic_size")

    if not parser.has_section("hypotheses"):
        raise ConfigError(f"{path}: missing [hypotheses] section")
    hs = parser["hypotheses"]
    try:
        hyps = Hypotheses(
            theta_plus=float(hs["theta_plus"]),
            theta_minus=float(hs["theta_minus"]),
            theta_cut=float(hs["theta_cut"]),
            alpha=float(hs["alpha"]),
            beta=float(hs["beta"]),
            theta_implied=float(hs["theta_implied"]) if "theta_implied" in hs else None)
    except KeyError as exc:
        raise ConfigError(f"{path}: [hypotheses] missing {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: [hypotheses]: {exc}") from None

    test = parser["test"] if parser.has_section("test") else {}
    max_length = int(test.get("max_length", "50"))
    min_stage = int(test.get("min_stage", "1"))
    selection_name = test.get("selection", SelectionRule.MAX_FISHER_AT_MLE.value)
    try:
        selection = SelectionRule(selection_name)
    except ValueError:
        raise ConfigError(f"{path}: unknown selection rule {selection_name!r}; choose from "
                          f"{[r.value for r in SelectionRule]}") from None
    clamp_vals = _floats(test.get("clamp", "")) if "clamp" in test else list(DEFAULT_CLAMP)
    if len(clamp_vals) != 2 or clamp_vals[0] >= clamp_vals[1]:
        raise ConfigError(f"{path}: clamp needs two increasing numbers, got {clamp_vals}")
    kl_offset = float(test["kl_offset"]) if "kl_offset" in test else None

    constraints = None
    if parser.has_section("content"):
        cs = parser["content"]
        try:
            constraints = ContentConstraints(
                proportions=tuple(_floats(cs["proportions"])),
                exposure_cap=float(cs["exposure_cap"]))
        except KeyError as exc:
            raise ConfigError(f"{path}: [content] missing {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{path}: [content]: {exc}") from None

    cal = parser["calibration"] if parser.has_section("calibration") else {}
    try:
        settings = CalibrationSettings(
            seed=seed,
            replications=int(cal.get("replications", "10000")),
            prob_tol=float(cal.get("prob_tol", "0.002")),
            x_tol=float(cal.get("x_tol", "0.005")),
            epsilon=float(cal.get("epsilon", "0.5")))
    except ValueError as exc:
        raise ConfigError(f"{path}: [calibration]: {exc}") from None
    method = cal.get("method", "monte-carlo")
    if method not in ("monte-carlo", "closed-form"):
        raise ConfigError(f"{path}: unknown calibration method {method!r}")
    calibration_report_path = out_dir / cal.get("report", "calibration.json")

    sim = parser["simulate"] if parser.has_section("simulate") else {}
    sim_replications = int(sim.get("replications", "10000"))
    sim_report_path = out_dir / sim.get("report", "simulation_report.csv")
    figures = _bool(sim.get("figures", "true"))
    theta_grid = _floats(sim["theta_grid"]) if "theta_grid" in sim else None

    rules: list[RuleSpec] = []
    for section in parser.sections():
        if not section.startswith("rule:"):
            continue
        rs = parser[section]
        name = section.split(":", 1)[1]
        if "kind" not in rs:
            raise ConfigError(f"{path}: [{section}] needs a kind")
        try:
            kind = RuleKind(rs["kind"])
        except ValueError:
            raise ConfigError(f"{path}: [{section}] unknown kind {rs['kind']!r}; choose from "
                              f"{[k.value for k in RuleKind]}") from None
        llr_ref = rs.get("llr_reference", "theta_minus")
        if llr_ref not in ("theta_minus", "theta_implied"):
            raise ConfigError(f"{path}: [{section}] llr_reference must be theta_minus or "
                              f"theta_implied, got {llr_ref!r}")
        rules.append(RuleSpec(
            name=name, kind=kind,
            alpha=float(rs["alpha"]) if "alpha" in rs else None,
            beta=float(rs["beta"]) if "beta" in rs else None,
            reject_bound=float(rs["reject_bound"]) if "reject_bound" in rs else None,
            accept_bound=float(rs["accept_bound"]) if "accept_bound" in rs else None,
            terminal_cutoff=float(rs["terminal_cutoff"]) if "terminal_cutoff" in rs else None,
            llr_reference=llr_ref))

    return RunConfig(
        path=path, seed=seed, workers=workers, out_dir=out_dir,
        pool_source=pool_source, synthetic=synthetic, hypotheses=hyps,
        max_length=max_length, min_stage=min_stage, selection=selection,
        clamp=(clamp_vals[0], clamp_vals[1]), kl_offset=kl_offset, constraints=constraints,
        calibration=settings, calibration_method=method,
        calibration_report_path=calibration_report_path,
        sim_replications=sim_replications, sim_report_path=sim_report_path,
        figures=figures, theta_grid=theta_grid, rules=rules)
