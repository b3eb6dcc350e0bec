"""Analytical per-iteration cost model, classical versus quantum.

Every soft-O is evaluated with constant 1 and log factors dropped, so the
numbers compare asymptotic shapes rather than predict wall-clock time.
"""

import csv
import itertools
import math
from dataclasses import asdict, dataclass, fields, replace

from irlearn.diagnostics import iteration_bound

HEADER = "soft-O evaluated with constant 1; log factors dropped"
FOOTER = (
    "the quantum per-iteration total uses the published exponents "
    "(1-gamma)^16 eps^24; the derivation's intermediate margin-solver term "
    "sqrt(n)/(eps^12 (1-gamma)^8) is typeset ambiguously and is not used in the total"
)
PARAM_NAMES = ("k", "S", "A", "gamma", "eps", "eps_rl", "delta", "n")


@dataclass(frozen=True)
class CostParams:
    k: int
    S: int
    A: int
    gamma: float
    eps: float
    eps_rl: float
    delta: float = 0.1
    n: float = None

    def __post_init__(self):
        for name in ("k", "S", "A"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma!r}")
        for name in ("eps", "eps_rl", "delta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")
        if not self.eps**2 > self.eps_rl:
            raise ValueError(f"need eps^2 > eps_rl, got eps={self.eps}, eps_rl={self.eps_rl}")
        if self.n is not None and not self.n > 0:
            raise ValueError(f"n must be positive, got {self.n!r}")

    def iterations(self):
        """``n`` if given, else the iteration bound (its leading-order form when vacuous)."""
        if self.n is not None:
            return float(self.n)
        bound = iteration_bound(self.k, self.gamma, self.eps, self.eps_rl)
        return bound.simplified if bound.vacuous else bound.iterations


def classical_iteration_cost(p):
    h = 1.0 - p.gamma
    return (p.k + p.S * p.A) / (h**7 * p.eps**6 * (p.eps**2 - p.eps_rl))


def quantum_iteration_cost(p):
    h = 1.0 - p.gamma
    return (math.sqrt(p.k) + p.S * math.sqrt(p.A)) / (h**16 * p.eps**24 * math.sqrt(p.eps**2 - p.eps_rl))


@dataclass(frozen=True)
class SubroutineCost:
    name: str
    classical: float
    quantum: float

    @property
    def ratio(self):
        return self.classical / self.quantum


@dataclass(frozen=True)
class CostReport:
    params: CostParams
    subroutines: tuple
    classical_total: float
    quantum_total: float
    header: str = HEADER
    footer: str = FOOTER

    @property
    def speedup(self):
        return self.classical_total / self.quantum_total

    def to_dict(self):
        return {
            "header": self.header,
            "params": asdict(self.params),
            "subroutines": [
                {"name": s.name, "classical": s.classical, "quantum": s.quantum, "ratio": s.ratio}
                for s in self.subroutines
            ],
            "classical_iteration_cost": self.classical_total,
            "quantum_iteration_cost": self.quantum_total,
            "speedup": self.speedup,
            "footer": self.footer,
        }


def subroutine_costs(p):
    """Tabulate each building block's classical and quantum cost.

    Mean and feature-expectation estimation and the margin solver use
    ``eps``; planning uses ``eps_rl``; L = 1/(1 - gamma).
    """
    h = 1.0 - p.gamma
    L = 1.0 / h
    n = p.iterations()
    rk = math.sqrt(p.k)
    rows = (
        SubroutineCost("min_finding", float(p.k), rk),
        SubroutineCost("mean_estimation", L * L * p.k / p.eps**2, L * rk / p.eps),
        SubroutineCost("feature_expectation", p.k / (p.eps**2 * h**3), rk / (p.eps * h**2)),
        SubroutineCost("margin_solver", (n + p.k) / p.eps**2, math.sqrt(n) / p.eps**4 + rk / p.eps**8),
        SubroutineCost(
            "rl_planning", p.S * p.A / (p.eps_rl**2 * h**3), p.S * math.sqrt(p.A) / (p.eps_rl * h**1.5)
        ),
    )
    return CostReport(p, rows, classical_iteration_cost(p), quantum_iteration_cost(p))


def crossover_sweep(base, grid):
    """Evaluate both iteration costs over the product of ``grid`` values.

    ``grid`` maps parameter names to value lists, iterated in the given key
    order (the last key varies fastest); unnamed parameters come from
    ``base``. Rows are dicts with every parameter plus ``classical_cost``,
    ``quantum_cost``, ``ratio`` and ``quantum_wins``. An empty grid gives
    no rows.
    """
    unknown = set(grid) - {f.name for f in fields(CostParams)}
    if unknown:
        raise ValueError(f"unknown sweep parameters: {sorted(unknown)}")
    names = list(grid)
    rows = []
    if not names:
        return rows
    for values in itertools.product(*(list(grid[n]) for n in names)):
        p = replace(base, **dict(zip(names, values)))
        c, q = classical_iteration_cost(p), quantum_iteration_cost(p)
        row = {name: getattr(p, name) for name in PARAM_NAMES}
        row.update(classical_cost=c, quantum_cost=q, ratio=c / q, quantum_wins=q < c)
        rows.append(row)
    return rows


def write_sweep_csv(path, rows):
    columns = list(PARAM_NAMES) + ["classical_cost", "quantum_cost", "ratio", "quantum_wins"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row[c] is None else _fmt(row[c]) for c in columns])


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)
