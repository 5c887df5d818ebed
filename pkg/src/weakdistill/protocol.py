"""Scenario runs, parameter sweeps, alpha scans and the per-cut PPT report."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import measures
from .measurement import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    MeasurementParams,
    OutcomeRecord,
    apply_protocol,
    branch_record,
    make_measurement_set,
    total_probability,
)
from .measures import Bipartition, CostBreakdown
from .states import DensityMatrix, StateSpec, make_ancilla

ALL_OUTCOMES = tuple((i, j) for i in (1, 2, 3) for j in (1, 2, 3))
DIAGONAL_OUTCOMES = ((1, 1), (2, 2), (3, 3))
DEFAULT_X_POINTS = 201
DEFAULT_ALPHA_POINTS = 99


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


def uniform_grid(points: int, lo: float = 0.0, hi: float = 1.0) -> tuple[float, ...]:
    if points < 2:
        raise ValueError("a grid needs at least two points")
    return tuple(float(v) for v in np.linspace(lo, hi, points))


def open_grid(points: int) -> tuple[float, ...]:
    """``points`` equally spaced values strictly inside (0, 1)."""
    return tuple(k / (points + 1) for k in range(1, points + 1))


def parse_outcomes(spec: str | Sequence[tuple[int, int]] | None) -> tuple[tuple[int, int], ...]:
    """``None``/``"all"`` -> nine pairs, ``"diag"`` -> i = j, ``"1,3;2,2"`` -> explicit pairs."""
    if spec is None or spec == "all" or spec == ():
        return ALL_OUTCOMES
    if spec == "diag":
        return DIAGONAL_OUTCOMES
    if isinstance(spec, str):
        pairs = []
        for chunk in spec.replace(" ", "").split(";"):
            if not chunk:
                continue
            parts = chunk.split(",")
            if len(parts) != 2:
                raise ValueError(f"bad outcome pair {chunk!r}; expected 'i,j'")
            pairs.append((int(parts[0]), int(parts[1])))
        spec = pairs
    out = []
    for i, j in spec:
        if (i, j) not in ALL_OUTCOMES:
            raise ValueError(f"outcome ({i},{j}) outside 1..3 x 1..3")
        if (i, j) not in out:
            out.append((i, j))
    if not out:
        raise ValueError("outcome filter selects nothing")
    return tuple(sorted(out))


@dataclass(frozen=True)
class ScenarioConfig:
    state: StateSpec
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    x_grid: tuple[float, ...] = field(default_factory=lambda: uniform_grid(DEFAULT_X_POINTS))
    outcomes: tuple[tuple[int, int], ...] = ALL_OUTCOMES
    alice_alpha: float | None = None
    alice_beta: float | None = None
    weighting: str = "joint"
    tripartite_mode: str = "square_of_average"
    tripartite: bool = True
    scan_cuts: bool = False

    def __post_init__(self):
        grid = tuple(float(x) for x in self.x_grid)
        if not grid:
            raise ValueError("x grid is empty")
        if any(not (0.0 <= x <= 1.0) for x in grid):
            raise ValueError("x grid values must lie in [0, 1]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("x grid must be strictly increasing")
        object.__setattr__(self, "x_grid", grid)
        object.__setattr__(self, "outcomes", parse_outcomes(self.outcomes))
        if self.weighting not in ("joint", "conditional"):
            raise ValueError("weighting must be 'joint' or 'conditional'")
        if self.tripartite_mode not in measures.TRIPARTITE_MODES:
            raise ValueError(f"tripartite_mode must be one of {measures.TRIPARTITE_MODES}")
        # fail early on bad measurement parameters
        self.params(0.5)
        self.alice_params(0.5)

    def params(self, x: float) -> MeasurementParams:
        return MeasurementParams(x, self.beta, self.alpha)

    def alice_params(self, x: float) -> MeasurementParams | None:
        if self.alice_alpha is None and self.alice_beta is None:
            return None
        return MeasurementParams(
            x,
            self.beta if self.alice_beta is None else self.alice_beta,
            self.alpha if self.alice_alpha is None else self.alice_alpha,
        )

    def manifest(self) -> dict[str, object]:
        return {
            "state": self.state.name,
            "state_param": self.state.param,
            "alpha": self.alpha,
            "beta": self.beta,
            "alice_alpha": self.alice_alpha,
            "alice_beta": self.alice_beta,
            "grid_points": len(self.x_grid),
            "x_min": self.x_grid[0],
            "x_max": self.x_grid[-1],
            "outcomes": ";".join(f"{i},{j}" for i, j in self.outcomes),
            "weighting": self.weighting,
            "tripartite_mode": self.tripartite_mode,
        }


@dataclass(frozen=True)
class CutReport:
    cut: str
    dims: tuple[int, int]
    negativity: float
    ppt: bool
    verdict: str


@dataclass(frozen=True, eq=False)
class ScenarioRecord:
    """Everything computed at one value of x."""

    x: float
    zeta: float
    records: tuple[OutcomeRecord, ...]
    n_ab: dict[tuple[int, int], float | None]
    avg_n_ab: float
    cost: CostBreakdown
    e_abc: float | None
    npt_branches: dict[str, int]

    @property
    def probabilities(self) -> dict[tuple[int, int], float]:
        return {r.outcome: r.joint_probability for r in self.records}

    @property
    def m_cost(self) -> float:
        return self.cost.m_cost

    @property
    def e_cost(self) -> float:
        return self.cost.e_cost

    def record(self, i: int, j: int) -> OutcomeRecord:
        return self.records[ALL_OUTCOMES.index((i, j))]


def run_scenario(config: ScenarioConfig, x: float, chi: DensityMatrix | None = None) -> ScenarioRecord:
    chi = chi if chi is not None else config.state.build()
    params = config.params(x)
    mset = make_measurement_set(params)
    ap = config.alice_params(x)
    alice = make_measurement_set(ap) if ap is not None else None
    ancilla = make_ancilla()
    records = apply_protocol(chi, mset, ancilla, alice)
    total = total_probability(records)
    if abs(total - 1.0) > measures.NORMALIZATION_TOL:
        raise InvariantViolation(f"branch probabilities sum to {total!r} at x={x}")

    n_ab_list = measures.branch_negativities(records, measures.CUT_AB)
    n_ab = {r.outcome: n for r, n in zip(records, n_ab_list)}
    avg = float(sum(r.joint_probability * n for r, n in zip(records, n_ab_list) if n is not None))
    cost = measures.measurement_cost(chi, mset, ancilla, weighting=config.weighting, alice_mset=alice, records=records)
    e_abc = measures.tripartite_entanglement(records, config.tripartite_mode) if config.tripartite else None

    npt: dict[str, int] = {"A|B": sum(1 for n in n_ab_list if n is not None and n > 0)}
    if config.scan_cuts:
        for cut in measures.iter_cuts():
            if cut == measures.CUT_AB:
                continue
            negs = measures.branch_negativities(records, cut)
            npt[str(cut)] = sum(1 for n in negs if n is not None and n > 0)
    return ScenarioRecord(float(x), params.zeta, tuple(records), n_ab, avg, cost, e_abc, npt)


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: ScenarioConfig
    rows: tuple[ScenarioRecord, ...]

    @property
    def x(self) -> np.ndarray:
        return np.array([r.x for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        """Numeric column by CSV header name (``N_AB_i1_j3``, ``avg_N_AB``, ...)."""
        if name not in self.columns("full"):
            raise KeyError(name)
        k = self.columns("full").index(name)
        return np.array([row[k] if row[k] is not None else np.nan for row in self.table("full")], dtype=float)

    def columns(self, kind: str = "sweep") -> list[str]:
        if kind == "cost":
            return ["x", "avg_N_AB", "M_cost", "E_cost", "E_ABC"]
        cols = ["x", "zeta"]
        for i, j in self.config.outcomes:
            cols.append(f"p_i{i}_j{j}")
        for i, j in self.config.outcomes:
            cols.append(f"N_AB_i{i}_j{j}")
        cols.append("avg_N_AB")
        if kind == "full":
            cols += ["M_cost", "E_cost", "E_ABC"]
        return cols

    def table(self, kind: str = "sweep") -> list[list[float | None]]:
        rows = []
        for r in self.rows:
            if kind == "cost":
                rows.append([r.x, r.avg_n_ab, r.m_cost, r.e_cost, r.e_abc])
                continue
            probs = r.probabilities
            row = [r.x, r.zeta]
            row += [probs[o] for o in self.config.outcomes]
            row += [r.n_ab[o] for o in self.config.outcomes]
            row.append(r.avg_n_ab)
            if kind == "full":
                row += [r.m_cost, r.e_cost, r.e_abc]
            rows.append(row)
        return rows

    def to_csv(self, out: TextIO | None = None, kind: str = "sweep", manifest: dict | None = None) -> str:
        return write_csv(self.columns(kind), self.table(kind), out, manifest or self.config.manifest())


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return ""
    return repr(float(v))


def write_csv(
    columns: Sequence[str], rows: Iterable[Sequence], out: TextIO | None = None, manifest: dict | None = None
) -> str:
    """Comma-separated table preceded by ``# key: value`` manifest lines.

    Floats use ``repr`` so they round-trip; absent values (null branches) are
    left empty.
    """
    buf = io.StringIO()
    for key, value in (manifest or {}).items():
        buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def sweep(config: ScenarioConfig, workers: int = 1) -> SweepResult:
    """Run every grid point; rows keep grid order whatever the worker count."""
    chi = config.state.build()
    if workers <= 1:
        rows = [run_scenario(config, x, chi) for x in config.x_grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda x: run_scenario(config, x, chi), config.x_grid))
    return SweepResult(config, tuple(rows))


@dataclass(frozen=True)
class AlphaScan:
    outcome: tuple[int, int]
    alphas: tuple[float, ...]
    values: tuple[float, ...]

    @property
    def argmax(self) -> float:
        return self.alphas[int(np.argmax(self.values))]

    @property
    def max(self) -> float:
        return float(np.max(self.values))


def branch_negativity_curve(
    chi: DensityMatrix, outcome: tuple[int, int], alpha: float, beta: float, x_grid: Sequence[float]
) -> np.ndarray:
    """A|B negativity of one branch along ``x_grid`` (null branches read as 0)."""
    states, idx = [], []
    ancilla = make_ancilla()
    for k, x in enumerate(x_grid):
        mset = make_measurement_set(MeasurementParams(x, beta, alpha))
        rec = branch_record(chi, mset, ancilla, outcome)
        if not rec.is_null:
            states.append(rec.state.reduce("C"))
            idx.append(k)
    out = np.zeros(len(x_grid))
    if states:
        out[idx] = measures.negativities(states, measures.CUT_AB)
    return out


def alpha_scan(
    state: StateSpec,
    outcome: tuple[int, int],
    x: float | Sequence[float],
    alpha_grid: Sequence[float] | None = None,
    beta: float = DEFAULT_BETA,
) -> AlphaScan:
    """Branch negativity vs alpha; with several x values, the max over x is taken."""
    alpha_grid = tuple(alpha_grid) if alpha_grid is not None else open_grid(DEFAULT_ALPHA_POINTS)
    if any(not (0.0 < a < 1.0) for a in alpha_grid):
        raise ValueError("alpha grid must lie in (0, 1)")
    xs = [float(x)] if np.isscalar(x) else [float(v) for v in x]
    chi = state.build()
    vals = tuple(float(np.max(branch_negativity_curve(chi, outcome, a, beta, xs))) for a in alpha_grid)
    return AlphaScan(tuple(outcome), alpha_grid, vals)


def _verdict(dims: tuple[int, int], ppt: bool) -> str:
    if not ppt:
        return "NPT (entangled)"
    if dims[0] * dims[1] <= 6:
        return "separable (PPT, 2x2 or 2x3)"
    return "PPT (undetermined separability)"


def bipartition_scan(record: OutcomeRecord | DensityMatrix) -> list[CutReport]:
    """Negativity and PPT verdict for the six cuts of a tripartite state.

    Pair cuts are taken on the two-party reduced state.  A PPT verdict is
    upgraded to separable only where PPT is sufficient (total dimension <= 6).
    """
    state = record.state if isinstance(record, OutcomeRecord) else record
    if state is None:
        raise ValueError("cannot scan a null branch")
    out = []
    for cut in measures.iter_cuts():
        reduced = measures.restrict(state, cut)
        dims = cut.dims(reduced.sig)
        neg = measures.negativity(reduced, cut)
        ppt = measures.is_ppt(reduced, cut)
        out.append(CutReport(str(cut), dims, neg, ppt, _verdict(dims, ppt)))
    return out
