"""Run configuration: ``key = value`` files with command-line overrides.

Example::

    input = data/log.csv
    out = results
    features = a-cs, a-df-s
    label = grade:course-131:4
    max_depth = 5
    k = 4
    seed = 0
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from .features import Selector, parse_selector
from .labels import GRADE_BAD, GRADE_GOOD, LabelSpec, parse_label_spec
from .rules import RELEVANCY
from .synth import CohortSpec, PlantedRule
from .tree import Hyperparams


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _placement(text: str) -> tuple[str, int]:
    course, _, sem = text.strip().rpartition(":")
    if not course:
        raise ValueError(f"placement must look like course:semester, got {text!r}")
    return course, int(sem)


@dataclass(frozen=True)
class RunConfig:
    input: Optional[str] = None
    out: str = "out"
    delimiter: str = ","
    courses: tuple[str, ...] = ()
    features: tuple[Selector, ...] = (parse_selector("a-cs"),)
    label: LabelSpec = LabelSpec()
    max_depth: int = 5
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    k: int = 4
    seed: int = 0
    stratified: bool = True
    relevancy: str = "product"
    top_k: int = 3
    plan: Optional[str] = None
    student: Optional[str] = None
    # synthetic cohort
    n_students: int = 200
    n_courses: int = 18
    semesters_span: int = 6
    fail_rate: float = 0.15
    gap_probability: float = 0.05
    take_rate: float = 1.0
    placement_rate: float = 0.8
    planted_antecedent: tuple[tuple[str, int], ...] = ()
    planted_target: Optional[tuple[str, int]] = None
    planted_consequent: str = "good"
    planted_noise: float = 0.1

    @property
    def hyperparams(self) -> Hyperparams:
        return Hyperparams(self.max_depth, self.min_samples_leaf, self.min_samples_split)

    def cohort_spec(self) -> CohortSpec:
        planted = ()
        if self.planted_target is not None:
            planted = (PlantedRule(
                frozenset(self.planted_antecedent),
                self.planted_target[0],
                self.planted_target[1],
                GRADE_GOOD if self.planted_consequent == "good" else GRADE_BAD,
                self.planted_noise,
            ),)
        elif self.planted_antecedent:
            raise ConfigError("planted_antecedent given without planted_target")
        return CohortSpec(
            n_students=self.n_students,
            n_courses=self.n_courses,
            semesters_span=self.semesters_span,
            fail_rate=self.fail_rate,
            gap_probability=self.gap_probability,
            planted_rules=planted,
            seed=self.seed,
            take_rate=self.take_rate,
            placement_rate=self.placement_rate,
        )


_PARSERS: dict[str, Any] = {
    "input": str,
    "out": str,
    "delimiter": lambda s: s if len(s) == 1 else {"tab": "\t", "comma": ",", "semicolon": ";"}[s],
    "courses": _list,
    "features": lambda s: tuple(parse_selector(p) for p in _list(s)),
    "label": parse_label_spec,
    "max_depth": int,
    "min_samples_leaf": int,
    "min_samples_split": int,
    "k": int,
    "seed": int,
    "stratified": _bool,
    "relevancy": str,
    "top_k": int,
    "plan": str,
    "student": str,
    "n_students": int,
    "n_courses": int,
    "semesters_span": int,
    "fail_rate": float,
    "gap_probability": float,
    "take_rate": float,
    "placement_rate": float,
    "planted_antecedent": lambda s: tuple(_placement(p) for p in _list(s)),
    "planted_target": _placement,
    "planted_consequent": str,
    "planted_noise": float,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def read_config_file(path: str | Path) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return dict(parser["run"])


def build_config(values: Mapping[str, Any]) -> RunConfig:
    """Validate raw ``values`` (strings or already-typed) into a :class:`RunConfig`."""
    unknown = sorted(set(values) - set(_PARSERS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    typed = {}
    for key, raw in values.items():
        if raw is None:
            continue
        try:
            typed[key] = _PARSERS[key](raw) if isinstance(raw, str) else raw
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    cfg = RunConfig(**typed)
    if not cfg.features:
        raise ConfigError("features: at least one feature family is required")
    if cfg.relevancy not in RELEVANCY:
        raise ConfigError(f"relevancy must be one of {sorted(RELEVANCY)}")
    if cfg.planted_consequent not in ("good", "bad"):
        raise ConfigError("planted_consequent must be 'good' or 'bad'")
    if cfg.k < 2:
        raise ConfigError("k must be at least 2")
    if cfg.top_k < 1:
        raise ConfigError("top_k must be positive")
    try:
        cfg.hyperparams
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: Optional[str | Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    values: dict[str, Any] = read_config_file(path) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(values)
