"""Run and study configuration files.

Plain INI-style text: ``[section]`` headers and ``key = value`` lines, ``#``
comments, lists separated by commas.  Sections:

``[mixture]`` (required)
    ``gamma``, and either ``r`` or ``c_v``; optional ``e0``.  One entry per
    species.  There are no defaults for the gas parameters.
``[run]``
    ``case`` (``khi``, ``manufactured`` or ``uniform``), ``cells``, ``dim``,
    ``t_end``, ``cfl``, ``integrator``, ``viscosity``, ``snapshot_times``,
    ``check_entropy``, ``projected_init``.
``[khi]``
    ``seed``, ``epsilon``, ``pressure``.
``[manufactured]``
    ``c``, ``A``, ``energy_profile``.
``[uniform]``
    ``rho`` (per species), ``u`` (per dimension), ``p``, ``box``.
``[study]``
    ``meshes``, ``reference``, ``times``, ``test_function``, ``workers``.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .thermo import GasMixture, SpeciesParams


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


@dataclass
class RunSpec:
    case: str
    mixture: GasMixture
    dim: int = 2
    cells: int = 64
    t_end: float = 1.0
    cfl: float = 0.5
    integrator: str = "ssprk3"
    viscosity: str = "local"
    snapshot_times: list[float] = dc_field(default_factory=list)
    check_entropy: bool = True
    projected_init: bool = False
    case_params: dict = dc_field(default_factory=dict)
    study: dict = dc_field(default_factory=dict)
    text: str = ""

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]


def _get(parser, section, key, conv, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"[{section}] missing required key {key!r}")
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValueError as err:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {err}") from None


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_mixture(parser) -> GasMixture:
    if not parser.has_section("mixture"):
        raise ConfigError("missing [mixture] section")
    gammas = _get(parser, "mixture", "gamma", _floats, required=True)
    rs = _get(parser, "mixture", "r", _floats)
    cvs = _get(parser, "mixture", "c_v", _floats)
    if (rs is None) == (cvs is None):
        raise ConfigError("[mixture] give exactly one of 'r' or 'c_v'")
    e0s = _get(parser, "mixture", "e0", _floats, default=[0.0] * len(gammas))
    other = rs if rs is not None else cvs
    if not len(gammas) == len(other) == len(e0s):
        raise ConfigError("[mixture] gamma, r/c_v and e0 need one entry per species")
    try:
        if rs is not None:
            species = [SpeciesParams.from_gamma_r(g, r, e) for g, r, e in zip(gammas, rs, e0s)]
        else:
            species = [SpeciesParams(g, cv, e) for g, cv, e in zip(gammas, cvs, e0s)]
    except ValueError as err:
        raise ConfigError(f"[mixture] {err}") from None
    return GasMixture(tuple(species))


def parse_config(text: str) -> RunSpec:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(str(err)) from None
    mix = parse_mixture(parser)
    sec = "run"
    if not parser.has_section(sec):
        raise ConfigError("missing [run] section")
    case = _get(parser, sec, "case", str.strip, required=True)
    if case not in ("khi", "manufactured", "uniform"):
        raise ConfigError(f"[run] case = {case!r}: expected khi, manufactured or uniform")
    spec = RunSpec(
        case=case, mixture=mix,
        dim=_get(parser, sec, "dim", int, 1 if case == "uniform" else 2),
        cells=_get(parser, sec, "cells", int, 64),
        t_end=_get(parser, sec, "t_end", float, 2.0 if case == "khi" else 0.4),
        cfl=_get(parser, sec, "cfl", float, 0.8 if case == "khi" else 0.5),
        integrator=_get(parser, sec, "integrator", str.strip, "ssprk3"),
        viscosity=_get(parser, sec, "viscosity", str.strip, "local"),
        snapshot_times=_get(parser, sec, "snapshot_times", _floats, []),
        check_entropy=_get(parser, sec, "check_entropy", _bool, True),
        projected_init=_get(parser, sec, "projected_init", _bool, False),
        text=text,
    )
    if not 0.0 < spec.cfl <= 1.0:
        raise ConfigError(f"[run] cfl = {spec.cfl}: must lie in (0, 1]")
    if not spec.t_end > 0.0:
        raise ConfigError(f"[run] t_end = {spec.t_end}: must be positive")
    if spec.cells < 1:
        raise ConfigError(f"[run] cells = {spec.cells}: must be positive")
    if spec.integrator not in ("euler", "ssprk3"):
        raise ConfigError(f"[run] integrator = {spec.integrator!r}: expected euler or ssprk3")
    if spec.viscosity not in ("local", "global"):
        raise ConfigError(f"[run] viscosity = {spec.viscosity!r}: expected local or global")
    if parser.has_section(case):
        spec.case_params = dict(parser.items(case))
    if parser.has_section("study"):
        spec.study = dict(parser.items("study"))
    return spec


def load_config(path) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from None
    return parse_config(text)
