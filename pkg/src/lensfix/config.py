"""Model configuration files.

INI-style text with a ``[model]`` section and an optional ``[options]``
section overriding solver tolerances. List values use Python literal syntax::

    [model]
    type = point_ensemble
    masses = [0.5, 0.5]
    positions = [[-0.5, 0.0], [0.5, 0.0]]

    [options]
    residual_tol = 1e-10

Other model types: ``plummer`` (``theta_e``, ``a``), ``filament`` (``sigma0``)
and ``raw`` (``u1``, ``v1``, ``u2``, ``v2``: coefficient tables whose rows are
``[i, j, re, im]`` for the term ``(re + i im) z1**i z2**j``).
"""
from __future__ import annotations

import ast
import configparser
from dataclasses import fields
from pathlib import Path

from .algebra import BiPoly, RationalFn
from .errors import ConfigError, ModelError
from .lens import DeflectionModel, filament, plummer, point_mass_ensemble, raw_model
from .solver import SolveOptions

MODEL_TYPES = ("point_ensemble", "plummer", "filament", "raw")


def _literal(section, key):
    if key not in section:
        raise ConfigError(f"missing parameter {key!r} in [model]")
    text = section[key]
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"cannot parse {key} = {text!r}") from exc


def _number(section, key) -> float:
    v = _literal(section, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number")
    return float(v)


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float, complex)) and not isinstance(v, bool):
        return complex(v)
    raise ConfigError(f"cannot read {v!r} as a position")


def coefficient_table(rows) -> BiPoly:
    if not isinstance(rows, (list, tuple)):
        raise ConfigError("coefficient table must be a list of [i, j, re, im] rows")
    terms: dict = {}
    for row in rows:
        if not (isinstance(row, (list, tuple)) and len(row) == 4):
            raise ConfigError(f"bad coefficient row {row!r}")
        i, j, re, im = row
        if not (isinstance(i, int) and isinstance(j, int) and i >= 0 and j >= 0):
            raise ConfigError(f"exponents must be non-negative integers in {row!r}")
        terms[(i, j)] = terms.get((i, j), 0) + complex(float(re), float(im))
    return BiPoly.from_terms(terms)


def model_from_section(section) -> DeflectionModel:
    kind = section.get("type")
    if kind not in MODEL_TYPES:
        raise ConfigError(f"model type must be one of {', '.join(MODEL_TYPES)}, got {kind!r}")
    try:
        if kind == "point_ensemble":
            masses = _literal(section, "masses")
            positions = _literal(section, "positions")
            if not isinstance(masses, (list, tuple)) or not isinstance(positions, (list, tuple)):
                raise ConfigError("masses and positions must be lists")
            model = point_mass_ensemble([float(m) for m in masses], [_complex(p) for p in positions])
        elif kind == "plummer":
            model = plummer(_number(section, "theta_e"), _number(section, "a"))
        elif kind == "filament":
            model = filament(_number(section, "sigma0"))
        else:
            a1 = RationalFn(coefficient_table(_literal(section, "u1")), coefficient_table(_literal(section, "v1")))
            a2 = RationalFn(coefficient_table(_literal(section, "u2")), coefficient_table(_literal(section, "v2")))
            model = raw_model(a1, a2)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    name = section.get("name")
    if name:
        model = DeflectionModel(model.alpha1, model.alpha2, name, model.psi_form, model.params)
    return model


def options_from_section(section) -> SolveOptions:
    known = {f.name: f.type for f in fields(SolveOptions)}
    values = {}
    for key, text in section.items():
        if key not in known:
            raise ConfigError(f"unknown option {key!r}")
        try:
            values[key] = int(text) if key == "max_newton_iter" else float(text)
        except ValueError as exc:
            raise ConfigError(f"cannot parse option {key} = {text!r}") from exc
    try:
        return SolveOptions(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> tuple[DeflectionModel, SolveOptions]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if not parser.has_section("model"):
        raise ConfigError("config needs a [model] section")
    model = model_from_section(parser["model"])
    opts = options_from_section(parser["options"]) if parser.has_section("options") else SolveOptions()
    return model, opts


def load_config(path) -> tuple[DeflectionModel, SolveOptions]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)
