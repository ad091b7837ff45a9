"""Scenario documents for the convergence harness.

A scenario is a JSON object:

    {
      "name": "rqi-scalar",
      "dims": {"d_h": 1, "d_k": 1},
      "family": {"type": "rqi", "params": {"H_S": [[1]], ...}},
      "test_functions": [{"f": {...}, "g": {...}}],
      "T": 1.0,
      "h_grid": [0.0625, 0.03125],
      "time_grid_extra": 0,
      "seed": 7,
      "tolerances": {"monotone_slack": 0.05, "final_ratio": 0.05},
      "flow": {"x": [[1, 0], [0, -1]], "T": 0.5, "h_grid": [0.5, 0.25]}
    }

Complex entries are written as [re, im] pairs; plain numbers are real.
Matrices are row-major nested lists. A family whose params hold
"random": true draws its data from the scenario seed.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..dynamics.walk import StepFunction
from ..errors import ConfigError, DilationRequiredError, DimensionError, MatrixError, StructureError
from ..generators.ito import GeneratorParams
from ..linalg.block import BlockOperator
from ..linalg.random import (
    make_rng,
    random_contraction,
    random_isometry,
    random_matrix,
    random_phase_hermitian,
    random_skewadjoint,
    random_unitary,
    scaled,
)
from ..models.families import (
    GeneratorFamily,
    compressed_family,
    preservation_family,
    realize_from_generator,
    realize_general,
    realize_isometric,
    realize_unitary_exp,
    table_family,
)
from ..models.rqi import RQIParams, bipartite_family, rqi_family

logger = logging.getLogger(__name__)

FAMILY_TYPES = (
    "rqi",
    "bipartite",
    "preservation",
    "realize_isometric",
    "realize_general",
    "realize_unitary_exp",
    "explicit_Gh_table",
    "from_generator",
)


def parse_complex_array(value: Any, path: str, ndim: int) -> np.ndarray:
    """Nested lists with [re, im] leaves (or real leaves) to a complex array of rank ndim."""
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a numeric array: {exc}", path) from exc
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        out = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == ndim:
        out = arr.astype(np.complex128)
    else:
        raise ConfigError(f"expected a rank-{ndim} array (complex entries as [re, im]), got shape {arr.shape}", path)
    if not np.all(np.isfinite(out)):
        raise ConfigError("array has non-finite entries", path)
    return out


def _matrix(params: dict, key: str, path: str) -> np.ndarray:
    if key not in params:
        raise ConfigError("missing matrix", f"{path}.{key}")
    return parse_complex_array(params[key], f"{path}.{key}", 2)


def _require(data: dict, key: str, path: str) -> Any:
    if key not in data:
        raise ConfigError("missing required key", f"{path}.{key}" if path else key)
    return data[key]


def _positive_float(value: Any, path: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a number: {value!r}", path) from exc
    if not x > 0 or not np.isfinite(x):
        raise ConfigError(f"must be a positive number, got {value!r}", path)
    return x


def _int(value: Any, path: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"must be an integer >= {minimum}, got {value!r}", path)
    return value


def parse_step_function(data: Any, path: str) -> StepFunction:
    """{"breakpoints": [...], "values": [...]} or {"constant": vector}."""
    if not isinstance(data, dict):
        raise ConfigError("step function must be an object", path)
    if "constant" in data:
        vec = parse_complex_array(data["constant"], f"{path}.constant", 1)
        return StepFunction.constant(vec)
    breakpoints = _require(data, "breakpoints", path)
    values = parse_complex_array(_require(data, "values", path), f"{path}.values", 2)
    try:
        return StepFunction(np.asarray(breakpoints, dtype=float), values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from exc


@dataclass(frozen=True)
class Tolerances:
    """Pass rules for one test-function pair.

    Attributes:
        monotone_slack: Each error may exceed its predecessor by this relative amount.
        final_ratio: Final error must be at most this fraction of the first.
        zero_error: Errors below this are treated as exact.
        order_min: Lower bound on the final order estimate, if any.
        order_max: Upper bound on the final order estimate, if any.
    """

    monotone_slack: float = 0.05
    final_ratio: float = 0.05
    zero_error: float = 1e-12
    order_min: float | None = None
    order_max: float | None = None

    @classmethod
    def from_dict(cls, data: Any, path: str = "tolerances") -> "Tolerances":
        if data is None:
            return cls()
        if not isinstance(data, dict):
            raise ConfigError("must be an object", path)
        known = {"monotone_slack", "final_ratio", "zero_error", "order_min", "order_max"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", path)
        values = {}
        for key, raw in data.items():
            if raw is None:
                values[key] = None
                continue
            try:
                values[key] = float(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"not a number: {raw!r}", f"{path}.{key}") from exc
        return cls(**values)


@dataclass(frozen=True)
class FlowSpec:
    """Inputs of the toy-Fock flow Cauchy check."""

    x: np.ndarray
    T: float
    h_grid: list[float]


@dataclass
class ScenarioConfig:
    """A validated scenario document."""

    name: str
    dim_h: int
    dim_k: int
    family_type: str
    family_params: dict
    test_functions: list[tuple[StepFunction, StepFunction]]
    T: float
    h_grid: list[float]
    time_grid_extra: int = 0
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    dim_h2: int | None = None
    compress: dict | None = None
    flow: FlowSpec | None = None

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read scenario: {exc}", str(path)) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", str(path)) from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Any) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("scenario must be a JSON object")
        dims = _require(data, "dims", "")
        if not isinstance(dims, dict):
            raise ConfigError("must be an object", "dims")
        dim_h = _int(_require(dims, "d_h", "dims"), "dims.d_h", 1)
        dim_k = _int(_require(dims, "d_k", "dims"), "dims.d_k", 1)
        dim_h2 = _int(dims["d_h2"], "dims.d_h2", 1) if "d_h2" in dims else None

        family = _require(data, "family", "")
        if not isinstance(family, dict):
            raise ConfigError("must be an object", "family")
        family_type = _require(family, "type", "family")
        if family_type not in FAMILY_TYPES:
            raise ConfigError(f"unknown family type {family_type!r}; expected one of {', '.join(FAMILY_TYPES)}", "family.type")
        params = family.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("must be an object", "family.params")
        compress = family.get("compress")
        if compress is not None and not isinstance(compress, dict):
            raise ConfigError("must be an object", "family.compress")

        pairs_raw = _require(data, "test_functions", "")
        if not isinstance(pairs_raw, list) or not pairs_raw:
            raise ConfigError("must be a nonempty list", "test_functions")
        pairs = []
        for i, pair in enumerate(pairs_raw):
            where = f"test_functions[{i}]"
            if not isinstance(pair, dict):
                raise ConfigError("must be an object with keys f and g", where)
            f = parse_step_function(_require(pair, "f", where), f"{where}.f")
            g = parse_step_function(_require(pair, "g", where), f"{where}.g")
            pairs.append((f, g))

        T = _positive_float(_require(data, "T", ""), "T")
        h_raw = _require(data, "h_grid", "")
        if not isinstance(h_raw, list) or not h_raw:
            raise ConfigError("must be a nonempty list", "h_grid")
        h_grid = [_positive_float(h, f"h_grid[{i}]") for i, h in enumerate(h_raw)]

        flow = None
        if data.get("flow") is not None:
            flow_raw = data["flow"]
            if not isinstance(flow_raw, dict):
                raise ConfigError("must be an object", "flow")
            flow_h = _require(flow_raw, "h_grid", "flow")
            if not isinstance(flow_h, list) or len(flow_h) < 2:
                raise ConfigError("needs at least two values", "flow.h_grid")
            flow = FlowSpec(
                x=_matrix(flow_raw, "x", "flow"),
                T=_positive_float(_require(flow_raw, "T", "flow"), "flow.T"),
                h_grid=[_positive_float(h, f"flow.h_grid[{i}]") for i, h in enumerate(flow_h)],
            )

        return cls(
            name=str(data.get("name", family_type)),
            dim_h=dim_h,
            dim_k=dim_k,
            family_type=family_type,
            family_params=params,
            test_functions=pairs,
            T=T,
            h_grid=h_grid,
            time_grid_extra=_int(data.get("time_grid_extra", 0), "time_grid_extra"),
            seed=_int(data.get("seed", 0), "seed"),
            tolerances=Tolerances.from_dict(data.get("tolerances")),
            dim_h2=dim_h2,
            compress=compress,
            flow=flow,
        )

    def build_family(self) -> GeneratorFamily:
        """Construct the generator family the scenario describes.

        The returned family carries the structure class certified on its
        sample step sizes, which may be weaker than the one its limit suggests.

        Raises:
            ConfigError: Parameters are missing, malformed, or inconsistent.
            DilationRequiredError: A from_generator family lies outside the F_{Z,L,W} class.
        """
        rng = make_rng(self.seed)
        path = "family.params"
        try:
            family = self._build(rng, path)
            if self.compress is not None:
                family = compressed_family(family, self._embedding(rng))
            family = family.certified()
        except DilationRequiredError:
            raise
        except (MatrixError, DimensionError, StructureError) as exc:
            raise ConfigError(str(exc), path) from exc

        noise = family.dims[1]
        for i, (f, g) in enumerate(self.test_functions):
            if f.dim_k != noise or g.dim_k != noise:
                raise ConfigError(
                    f"test functions have noise dimensions ({f.dim_k}, {g.dim_k}), family has {noise}",
                    f"test_functions[{i}]",
                )
        logger.info(f"Built family {family.name} with dims {family.dims}, kind {family.kind.name}")
        return family

    def _embedding(self, rng: np.random.Generator) -> np.ndarray:
        if "J" in self.compress:
            return _matrix(self.compress, "J", "family.compress")
        dim = _int(_require(self.compress, "dim", "family.compress"), "family.compress.dim", 1)
        if dim > self.dim_k:
            raise ConfigError(f"cannot embed dimension {dim} into {self.dim_k}", "family.compress.dim")
        return random_isometry(rng, self.dim_k, dim)

    def _random(self) -> bool:
        return bool(self.family_params.get("random", False))

    def _rqi(self, rng: np.random.Generator, params: Any, dim_h: int, path: str) -> RQIParams:
        if not isinstance(params, dict):
            raise ConfigError("must be an object", path)
        if params.get("random", False):
            return RQIParams.random(rng, dim_h, self.dim_k, scattering=params.get("scattering", True))
        return RQIParams(*(_matrix(params, key, path) for key in ("H_S", "H_P", "V_D", "H_Sc")))

    def _build(self, rng: np.random.Generator, path: str) -> GeneratorFamily:
        d, k = self.dim_h, self.dim_k
        m = d * k
        params = self.family_params
        kind = self.family_type

        if kind == "rqi":
            return rqi_family(self._rqi(rng, params, d, path))

        if kind == "bipartite":
            if self.dim_h2 is None:
                raise ConfigError("bipartite families need dims.d_h2", "dims.d_h2")
            side1 = self._rqi(rng, _require(params, "side1", path), d, f"{path}.side1")
            side2 = self._rqi(rng, _require(params, "side2", path), self.dim_h2, f"{path}.side2")
            return bipartite_family(side1, side2)

        if kind == "preservation":
            C = random_contraction(rng, m) if self._random() else _matrix(params, "C", path)
            return preservation_family(C, d)

        if kind == "realize_isometric":
            if self._random():
                p = GeneratorParams(random_skewadjoint(rng, d), random_matrix(rng, m, d), random_unitary(rng, m))
            else:
                p = GeneratorParams(*(_matrix(params, key, path) for key in ("Z", "L", "W")))
            return realize_isometric(p)

        if kind == "realize_general":
            n = d * (1 + k)
            if self._random():
                T = BlockOperator(d, k, scaled(random_matrix(rng, n), 1.0))
                p = GeneratorParams(scaled(random_matrix(rng, d), 1.0), random_matrix(rng, m, d), random_contraction(rng, m))
            else:
                T = BlockOperator(d, k, _matrix(params, "T", path))
                p = GeneratorParams(*(_matrix(params, key, path) for key in ("Z", "L", "W")))
            return realize_general(T, p)

        if kind == "realize_unitary_exp":
            if self._random():
                return realize_unitary_exp(random_skewadjoint(rng, d), random_matrix(rng, m, d), random_phase_hermitian(rng, m))
            return realize_unitary_exp(*(_matrix(params, key, path) for key in ("Z", "L", "R")))

        if kind == "from_generator":
            return realize_from_generator(BlockOperator(d, k, _matrix(params, "F", path)))

        # explicit_Gh_table
        table = _require(params, "table", path)
        if not isinstance(table, list):
            raise ConfigError("must be a list of {h, G} entries", f"{path}.table")
        entries = []
        for i, entry in enumerate(table):
            where = f"{path}.table[{i}]"
            if not isinstance(entry, dict):
                raise ConfigError("must be an object with keys h and G", where)
            h = _positive_float(_require(entry, "h", where), f"{where}.h")
            entries.append((h, BlockOperator(d, k, _matrix(entry, "G", where))))
        limit = BlockOperator(d, k, _matrix(params, "limit", path))
        return table_family(entries, limit)
