"""Loading structure specs from names and JSON config files.

JSON schema (indices are 0-based)::

    {"name": "...", "dim": n,
     "pi": [{"i": 0, "j": 1, "terms": [{"exps": [...], "c": 1.0}]}],
     "lie": {"dim": n, "c": [[i, j, k, value], ...], "rep": [[[...]], ...]},
     "sign": -1,
     "perturbation": {"terms": [{"exps": [3n ints over p1, p2, x], "c": 0.5}]}}

Exactly one of "pi" and "lie" must be present.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from jets.polynomials import Polynomial
from numerics.errors import ConfigError
from poisson.models import LieAlgebraData, PoissonStructure, StructureConfig
from poisson.structures import (
    LIE_NAMES, LINEAR_SIGN, builtin_lie, builtin_structure, lie_to_poisson
)

logger = logging.getLogger(__name__)

FILE_PREFIX = "file:"
ANTISYMMETRY_TOL = 1e-12


def read_config_file(path: str) -> Dict[str, Any]:
    """
    Read a JSON structure config.

    Raises:
        ConfigError: If the file is missing or not valid JSON
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config '{path}': {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in '{path}': {e.msg}", e.lineno, e.colno)


def _parse_terms(raw_terms: Any, num_vars: int, where: str) -> list:
    if not isinstance(raw_terms, list):
        raise ConfigError(f"{where}: 'terms' must be a list")
    terms = []
    for term in raw_terms:
        try:
            exps = tuple(int(e) for e in term["exps"])
            value = float(term["c"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"{where}: malformed term {term!r}: {e}")
        if len(exps) != num_vars or min(exps, default=0) < 0:
            raise ConfigError(
                f"{where}: exponent {list(exps)} needs {num_vars} non-negative entries"
            )
        terms.append((exps, value))
    return terms


def _parse_lie(raw: Dict[str, Any], name: str) -> LieAlgebraData:
    try:
        dim = int(raw["dim"])
        entries = raw["c"]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"lie block needs 'dim' and 'c': {e}")

    c = np.zeros((dim, dim, dim))
    for entry in entries:
        try:
            i, j, k = (int(v) for v in entry[:3])
            value = float(entry[3])
        except (IndexError, TypeError, ValueError) as e:
            raise ConfigError(f"malformed structure constant {entry!r}: {e}")
        if not all(0 <= v < dim for v in (i, j, k)):
            raise ConfigError(f"structure constant index out of range: {entry!r}")
        partner = c[j, i, k]
        if partner != 0.0 and abs(partner + value) > ANTISYMMETRY_TOL:
            raise ConfigError(f"c[{i},{j},{k}] is not antisymmetric to c[{j},{i},{k}]")
        c[i, j, k] = value
        c[j, i, k] = -value

    rep = None
    if raw.get("rep") is not None:
        rep = [np.asarray(matrix, dtype=float) for matrix in raw["rep"]]
        if len(rep) != dim:
            raise ConfigError(f"rep needs {dim} matrices, got {len(rep)}")
    return LieAlgebraData(dim, c, rep, name=name)


def structure_from_dict(data: Dict[str, Any], source: str = "inline") -> StructureConfig:
    """
    Build a StructureConfig from a parsed JSON document.

    Raises:
        ConfigError: If the document does not follow the schema
    """
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    has_pi, has_lie = "pi" in data, "lie" in data
    if has_pi == has_lie:
        raise ConfigError("config needs exactly one of 'pi' and 'lie'")
    name = str(data.get("name", Path(source).stem if source != "inline" else "custom"))
    sign = float(data.get("sign", LINEAR_SIGN))

    lie = None
    if has_lie:
        lie = _parse_lie(data["lie"], name)
        poisson = lie_to_poisson(lie, sign)
        poisson = PoissonStructure(poisson.dim, poisson.coeffs, name=name, lie=lie)
    else:
        try:
            dim = int(data["dim"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"'pi' configs need an integer 'dim': {e}")
        coeffs = {}
        for block in data["pi"]:
            try:
                i, j = int(block["i"]), int(block["j"])
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"pi entry needs 'i' and 'j': {e}")
            if not (0 <= i < dim and 0 <= j < dim) or i == j:
                raise ConfigError(f"pi entry ({i}, {j}) out of range for dim {dim}")
            terms = _parse_terms(block.get("terms", []), dim, f"pi[{i},{j}]")
            if i > j:
                i, j = j, i
                terms = [(exps, -value) for exps, value in terms]
            coeffs.setdefault((i, j), []).extend(terms)
        poisson = PoissonStructure(dim, coeffs, name=name)

    perturbation = None
    if data.get("perturbation") is not None:
        n = poisson.dim
        terms = _parse_terms(data["perturbation"].get("terms"), 3 * n, "perturbation")
        perturbation = Polynomial(3 * n, {})
        for exps, value in terms:
            perturbation = perturbation + Polynomial(3 * n, {exps: value})
        logger.info(f"Structure '{name}' carries a generating-function perturbation")

    return StructureConfig(poisson, lie, perturbation, source=source)


def resolve_structure(
    pi_spec: Optional[str] = None,
    lie_spec: Optional[str] = None
) -> StructureConfig:
    """
    Resolve the --pi / --lie command-line specs.

    Args:
        pi_spec: Built-in Poisson name or file:<path>
        lie_spec: Built-in Lie algebra name or file:<path>

    Returns:
        StructureConfig

    Raises:
        ConfigError: If neither or both are given, or the name is unknown
    """
    if (pi_spec is None) == (lie_spec is None):
        raise ConfigError("give exactly one of --pi and --lie")
    spec = pi_spec if pi_spec is not None else lie_spec

    if spec.startswith(FILE_PREFIX):
        path = spec[len(FILE_PREFIX):]
        config = structure_from_dict(read_config_file(path), source=path)
        if lie_spec is not None and config.lie is None:
            raise ConfigError(f"--lie config '{path}' has no 'lie' block")
        return config

    try:
        if lie_spec is not None:
            lie = builtin_lie(lie_spec)
            return StructureConfig(lie_to_poisson(lie), lie)
        poisson = builtin_structure(pi_spec)
    except (KeyError, ValueError) as e:
        raise ConfigError(str(e).strip("'\""))
    return StructureConfig(poisson, poisson.lie)


def known_names() -> tuple:
    return ("zero", "constant", "constant4", "quadratic") + LIE_NAMES
