"""Run configuration: named polarization and endomorphism matrices, sample
counts, seeds, and the expected bracket coefficient table.

Config files are JSON; matrix entries are integers or fraction strings like
"-3/2".  Shipped defaults live in the package data directory, one per g.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from random import Random

from .errors import ChowkitError, ConfigError, RosatiError
from .model import ModelContext, Polarization
from .nsjordan import Endo

DEFAULT_SAMPLES = {
    "fourier_pairs": 120,     # random even pairs for the product exchange (g >= 3)
    "biext_triples": 60,      # random even triples for the bracket identities (g >= 3)
    "rosati_random": 100,     # random Rosati matrices for the N^2 = det check
    "jordan_y": 50,           # random y per quadratic endomorphism
    "diff_classes": 8,        # sampled even classes for the order table (g >= 3)
    "sl2lem_classes": 10,     # sampled even classes for the lowest-weight check (g >= 3)
    "saturate_fixtures": 5,   # random saturation seeds
}

GEN_SERIES_T = (Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2), Fraction(2))


def _parse_entry(x, where: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise ConfigError(f"{where}: matrix entries must be exact (int or 'p/q'), got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as err:
            raise ConfigError(f"{where}: bad rational {x!r} ({err})")
    raise ConfigError(f"{where}: bad matrix entry {x!r}")


def _parse_matrix(rows, where: str):
    if not isinstance(rows, list) or not rows:
        raise ConfigError(f"{where}: expected a nonempty matrix")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ConfigError(f"{where}: row {i} is not a list")
        out.append(tuple(_parse_entry(x, f"{where}[{i}]") for x in row))
    return tuple(out)


@dataclass
class RunConfig:
    g: int
    seed: int = 20240601
    truncation: int = 8
    samples: dict = field(default_factory=dict)
    polarizations: dict = field(default_factory=dict)   # name -> matrix
    endomorphisms: dict = field(default_factory=dict)   # name -> matrix
    suites: tuple | None = None
    bracket_table: tuple | None = None  # ((s, t, Fraction), ...)
    path: str | None = None

    def sample(self, key: str) -> int:
        return int(self.samples.get(key, DEFAULT_SAMPLES[key]))


def standard_polarization_matrix(g: int, scales=None):
    n = 2 * g
    rows = [[0] * n for _ in range(n)]
    for i in range(g):
        lam = 1 if scales is None else scales[i]
        rows[i][g + i] = lam
        rows[g + i][i] = -lam
    return rows


def default_polarization_matrices(g: int) -> dict:
    """Standard pairing plus two integrally perturbed nondegenerate ones."""
    std = standard_polarization_matrix(g)
    scaled = standard_polarization_matrix(g, scales=[1] * (g - 1) + [2])
    if g == 1:
        third = standard_polarization_matrix(1, scales=[3])
    else:
        third = standard_polarization_matrix(g)
        third[0][1] = 1
        third[1][0] = -1
    return {"d": std, "d2": scaled, "d3": third}


def _diag(entries):
    n = len(entries)
    return [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)]


def default_endomorphism_matrices(g: int) -> dict:
    """Rosati-symmetric library for the standard pairing: scalars always;
    for g >= 2 also paired diagonals and the factor swap."""
    n = 2 * g
    endos = {
        "f_id": _diag([1] * n),
        "f_two": _diag([2] * n),
        "f_neg": _diag([-1] * n),
        "f_three": _diag([3] * n),
    }
    if g >= 2:
        diag12 = _diag(([1, 2] + [1] * (g - 2)) * 2)
        diag35 = _diag(([3, 5] + [3] * (g - 2)) * 2)
        sgn = _diag(([1, -1] + [1] * (g - 2)) * 2)
        swap = [[0] * n for _ in range(n)]
        for i in range(n):
            swap[i][i] = 1
        for block in (0, g):
            swap[block][block] = swap[block + 1][block + 1] = 0
            swap[block][block + 1] = swap[block + 1][block] = 1
        endos.update(
            {"f_diag12": diag12, "f_diag35": diag35, "f_sgn": sgn, "f_swap": swap}
        )
    if g >= 3:
        endos["f_diag123"] = _diag(list(range(1, g + 1)) * 2)
    return endos


def pascal_bracket_table(max_weight: int = 8):
    """((s, t, -C(s+t+2, s+1)), ...) for s + t <= max_weight."""
    return tuple(
        (s, t, Fraction(-math.comb(s + t + 2, s + 1)))
        for s in range(max_weight + 1)
        for t in range(max_weight + 1 - s)
    )


def _parse_bracket_table(entries, where: str):
    out = []
    for e in entries:
        if not (isinstance(e, list) and len(e) == 3):
            raise ConfigError(f"{where}: table entries are [s, t, coefficient]")
        s, t, c = e
        if not (isinstance(s, int) and isinstance(t, int) and s >= 0 and t >= 0):
            raise ConfigError(f"{where}: bad indices in {e!r}")
        out.append((s, t, _parse_entry(c, where)))
    return tuple(out)


def _data_text(name: str) -> str:
    return resources.files("chowkit").joinpath("data").joinpath(name).read_text()


def packaged_bracket_table():
    doc = json.loads(_data_text("bracket_table.json"))
    return _parse_bracket_table(doc["entries"], "bracket_table.json")


def packaged_jordan_witness():
    return json.loads(_data_text("jordan_witness.json"))


def config_from_dict(doc: dict, path: str | None = None) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    try:
        g = int(doc["g"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("config needs an integer field 'g'")
    pols = {
        name: _parse_matrix(rows, f"polarization {name!r}")
        for name, rows in doc.get("polarizations", {}).items()
    }
    endos = {
        name: _parse_matrix(rows, f"endomorphism {name!r}")
        for name, rows in doc.get("endomorphisms", {}).items()
    }
    samples = dict(doc.get("samples", {}))
    for key in samples:
        if key not in DEFAULT_SAMPLES:
            raise ConfigError(f"unknown sample count {key!r}")
    table = doc.get("jacobian_bracket_table")
    if table is not None:
        if isinstance(table, str):
            base = Path(path).parent if path else Path.cwd()
            try:
                table_doc = json.loads((base / table).read_text())
            except OSError as err:
                raise ConfigError(f"cannot read bracket table {table!r}: {err}")
            table = _parse_bracket_table(
                table_doc.get("entries", []), table
            )
        else:
            table = _parse_bracket_table(table, "jacobian_bracket_table")
    suites = doc.get("suites")
    if suites is not None:
        suites = tuple(suites)
    return RunConfig(
        g=g,
        seed=int(doc.get("seed", 20240601)),
        truncation=int(doc.get("truncation_n", 8)),
        samples=samples,
        polarizations=pols,
        endomorphisms=endos,
        suites=suites,
        bracket_table=table,
        path=path,
    )


def load_config(path) -> RunConfig:
    path = str(path)
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config {path!r}: {err}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path!r} is not valid JSON: {err}")
    return config_from_dict(doc, path=path)


def default_config(g: int) -> RunConfig:
    """Shipped default for g <= 3; synthesized for larger g."""
    name = f"default_g{g}.json"
    try:
        doc = json.loads(_data_text(name))
        return config_from_dict(doc, path=None)
    except FileNotFoundError:
        pass
    return RunConfig(
        g=g,
        polarizations=default_polarization_matrices(g),
        endomorphisms=default_endomorphism_matrices(g),
    )


class Workspace:
    """Validated runtime objects for a configuration."""

    def __init__(self, config: RunConfig):
        self.config = config
        try:
            self.ctx = ModelContext(config.g)
        except ChowkitError as err:
            raise ConfigError(str(err))
        if not config.polarizations:
            raise ConfigError("config defines no polarizations")
        self.pols = []
        for name, rows in config.polarizations.items():
            try:
                self.pols.append(Polarization(self.ctx, rows, name))
            except ChowkitError as err:
                raise ConfigError(f"polarization {name!r}: {err}")
        self.pol_by_name = {p.name: p for p in self.pols}
        self.primary = self.pols[0]
        self.endos = {}
        for name, rows in config.endomorphisms.items():
            try:
                self.endos[name] = Endo(self.primary, rows, name)
            except RosatiError as err:
                lines = "; ".join(
                    "[" + ", ".join(str(x) for x in row) + "]" for row in err.residual
                )
                raise ConfigError(
                    f"endomorphism {name!r}: Rosati residual M^T E - E M = {lines}"
                )
            except ChowkitError as err:
                raise ConfigError(f"endomorphism {name!r}: {err}")
        self.bracket_table = (
            config.bracket_table
            if config.bracket_table is not None
            else packaged_bracket_table()
        )

    def rng(self, label: str) -> Random:
        """Deterministic per-suite stream: same seed, same draws."""
        return Random(f"{self.config.seed}:{label}")
