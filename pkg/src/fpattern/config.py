"""INI run configuration with strict per-section key whitelists.

Unknown sections and keys are hard errors so a typo never silently falls
back to a default.  Values are kept as strings until a typed getter pulls
them, which is where conversion errors get named.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

from .errors import ConfigurationError
from .fields import Grid2D, make_grid
from .patterns import (Pattern, build_axisymmetric, build_sector_vortex,
                       build_shear, build_zero, quintic_bump)
from .pressure import PhysicalParams

_SCHEMA = {
    "pattern": {"kind", "r0", "amplitude", "nx", "ny",
                "xmin", "xmax", "ymin", "ymax", "shear_axis"},
    "physics": {"gamma", "C", "l", "pi_ambient"},
    "bearing": {"pi1_kind", "a", "b", "gx", "gy", "amp", "x0x", "x0y", "width",
                "velocity", "dt", "T", "X0x", "X0y", "V0x", "V0y"},
    "evolve": {"bc", "dt", "T", "kappa", "stride", "cfl_margin"},
    "output": {"directory", "formats", "png", "quiver_stride", "threads"},
    "verify": {"ladder", "inner", "band_cells", "rim_fraction"},
}

_PATTERN_KINDS = ("axisymmetric", "shear", "sector", "zero")


@dataclass
class RunConfig:
    """Validated key/value table per section plus the raw config text."""

    sections: dict
    text: str
    path: str

    def has(self, section, key):
        return key in self.sections.get(section, {})

    def _raw(self, section, key, default):
        sec = self.sections.get(section)
        if sec is None or key not in sec:
            if default is _REQUIRED:
                raise ConfigurationError(f"missing required key [{section}] {key}")
            return default
        return sec[key]

    def get_str(self, section, key, default=None, choices=None):
        val = self._raw(section, key, default)
        if choices is not None and val not in choices:
            raise ConfigurationError(
                f"[{section}] {key} = {val!r} not in {sorted(choices)}")
        return val

    def get_float(self, section, key, default=None):
        val = self._raw(section, key, default)
        if isinstance(val, str):
            try:
                return float(val)
            except ValueError:
                raise ConfigurationError(
                    f"[{section}] {key} = {val!r} is not a number") from None
        return val

    def get_int(self, section, key, default=None):
        val = self._raw(section, key, default)
        if isinstance(val, str):
            try:
                return int(val)
            except ValueError:
                raise ConfigurationError(
                    f"[{section}] {key} = {val!r} is not an integer") from None
        return val

    def get_bool(self, section, key, default=False):
        val = self._raw(section, key, default)
        if isinstance(val, bool):
            return val
        low = val.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"[{section}] {key} = {val!r} is not a boolean")

    def get_int_list(self, section, key, default=None):
        val = self._raw(section, key, default)
        if not isinstance(val, str):
            return val
        try:
            return [int(tok) for tok in val.replace(" ", "").split(",") if tok]
        except ValueError:
            raise ConfigurationError(
                f"[{section}] {key} = {val!r} is not a comma list of integers") from None


class _Required:
    pass


_REQUIRED = _Required()


def load_config(path) -> RunConfig:
    """Parse and whitelist-validate an INI config file."""
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    sections = {}
    for name in parser.sections():
        if name not in _SCHEMA:
            raise ConfigurationError(
                f"unknown config section [{name}]; known: {sorted(_SCHEMA)}")
        allowed = _SCHEMA[name]
        sec = {}
        for key, value in parser.items(name):
            # configparser lowercases keys; the schema is lowercase except C/T/X0/V0
            match = _match_key(key, allowed)
            if match is None:
                raise ConfigurationError(
                    f"unknown key {key!r} in section [{name}]; "
                    f"allowed: {sorted(allowed)}")
            sec[match] = value.strip()
        sections[name] = sec
    return RunConfig(sections, text, str(path))


def _match_key(lowered, allowed):
    for cand in allowed:
        if cand.lower() == lowered:
            return cand
    return None


def grid_from(cfg: RunConfig) -> Grid2D:
    nx = cfg.get_int("pattern", "nx", _REQUIRED)
    ny = cfg.get_int("pattern", "ny", _REQUIRED)
    bounds = tuple(cfg.get_float("pattern", k, _REQUIRED)
                   for k in ("xmin", "xmax", "ymin", "ymax"))
    return make_grid(nx, ny, bounds)


def params_from(cfg: RunConfig) -> PhysicalParams:
    return PhysicalParams(gamma=cfg.get_float("physics", "gamma", _REQUIRED),
                          C=cfg.get_float("physics", "C", _REQUIRED),
                          l=cfg.get_float("physics", "l", _REQUIRED))


def pattern_from(cfg: RunConfig, grid=None) -> Pattern:
    """Build the configured pattern; grid override supports refinement ladders."""
    kind = cfg.get_str("pattern", "kind", _REQUIRED, choices=_PATTERN_KINDS)
    if grid is None:
        grid = grid_from(cfg)
    if kind == "zero":
        return build_zero(grid)
    profile = quintic_bump(cfg.get_float("pattern", "r0", _REQUIRED),
                           cfg.get_float("pattern", "amplitude", _REQUIRED))
    if kind == "axisymmetric":
        return build_axisymmetric(profile, grid)
    if kind == "shear":
        return build_shear(profile, cfg.get_int("pattern", "shear_axis", 0), grid)
    return build_sector_vortex(profile, grid)
