"""Market spec documents, random scenario generation, and trace files.

A market spec is a JSON document

    {"n": 2,
     "consumers": [{"count": 2.0, "utilities": [...],
                    "nests": [{"members": [1, 2], "mu": 0.5}, ...]}],
     "suppliers": [{"gamma": 0.5, "y_nat": [...],
                    "capacity": {"lo": [...], "hi": [...]},
                    "base_cost": {"kind": "linear", "c": [...]}}]}

with 1-based alternative indices in `members` (converted to 0-based
internally). Documents are serialized canonically (sorted keys, 2-space
indent, full-precision floats) so that generate -> write -> parse ->
write is byte-identical.

Trace files are CSV with header iter,ter,grad_norm,min_excess,
complementarity,step, one row per iteration at >= 15 significant
digits, and a final comment line `# price = [..]`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .market import ConsumerType, Market
from .nested_logit import MU_MIN, NestStructure, StructureError
from .supply import Supplier

# Distinct error codes for spec-file diagnostics.
CODE_MALFORMED = "malformed"
CODE_PARTITION = "partition"
CODE_MU_RANGE = "mu-range"
CODE_GAMMA = "gamma"
CODE_BOUNDS = "bounds"


class SpecError(ValueError):
    """Spec document rejected; carries an error code and a field path."""

    def __init__(self, code: str, path: str, message: str):
        super().__init__(f"{path}: {message} [{code}]")
        self.code = code
        self.path = path


def _require(cond: bool, code: str, path: str, message: str) -> None:
    if not cond:
        raise SpecError(code, path, message)


def _number(doc: Any, path: str) -> float:
    _require(isinstance(doc, (int, float)) and not isinstance(doc, bool),
             CODE_MALFORMED, path, f"expected a number, got {type(doc).__name__}")
    return float(doc)


def _vector(doc: Any, n: int, path: str) -> np.ndarray:
    _require(isinstance(doc, list), CODE_MALFORMED, path, "expected an array")
    _require(len(doc) == n, CODE_MALFORMED, path,
             f"expected {n} entries, got {len(doc)}")
    return np.array([_number(x, f"{path}[{i}]") for i, x in enumerate(doc)])


def _mapping(doc: Any, path: str) -> dict:
    _require(isinstance(doc, dict), CODE_MALFORMED, path, "expected an object")
    return doc


def _key(doc: dict, name: str, path: str) -> Any:
    _require(name in doc, CODE_MALFORMED, path, f"missing key {name!r}")
    return doc[name]


def _parse_nests(doc: Any, n: int, path: str) -> NestStructure:
    _require(isinstance(doc, list) and doc, CODE_MALFORMED, path,
             "expected a nonempty array of nests")
    members: list[tuple[int, ...]] = []
    mus: list[float] = []
    seen: dict[int, int] = {}
    for l, nest_doc in enumerate(doc):
        npath = f"{path}[{l}]"
        nest_doc = _mapping(nest_doc, npath)
        raw = _key(nest_doc, "members", npath)
        _require(isinstance(raw, list) and raw, CODE_MALFORMED, f"{npath}.members",
                 "expected a nonempty array of 1-based indices")
        idx = []
        for i, x in enumerate(raw):
            _require(isinstance(x, int) and not isinstance(x, bool), CODE_MALFORMED,
                     f"{npath}.members[{i}]", "expected an integer index")
            _require(1 <= x <= n, CODE_PARTITION, f"{npath}.members[{i}]",
                     f"index {x} outside 1..{n}")
            _require(x not in seen, CODE_PARTITION, f"{npath}.members[{i}]",
                     f"nests not disjoint: index {x} already in nest {seen[x] + 1}"
                     if x in seen else "")
            seen[x] = l
            idx.append(x - 1)
        mu = _number(_key(nest_doc, "mu", npath), f"{npath}.mu")
        _require(MU_MIN < mu <= 1.0, CODE_MU_RANGE, f"{npath}.mu",
                 f"mu out of range (0,1]: {mu}")
        members.append(tuple(idx))
        mus.append(mu)
    missing = sorted(set(range(1, n + 1)) - set(seen))
    _require(not missing, CODE_PARTITION, path,
             f"nests do not cover all alternatives; missing {missing}")
    return NestStructure(n, tuple(members), tuple(mus))


def _parse_consumer(doc: Any, n: int, path: str) -> ConsumerType:
    doc = _mapping(doc, path)
    count = _number(_key(doc, "count", path), f"{path}.count")
    _require(count > 0, CODE_MALFORMED, f"{path}.count",
             f"population count must be positive, got {count}")
    a = _vector(_key(doc, "utilities", path), n, f"{path}.utilities")
    nests = _parse_nests(_key(doc, "nests", path), n, f"{path}.nests")
    return ConsumerType(count=count, a=a, nests=nests)


def _parse_supplier(doc: Any, n: int, path: str) -> Supplier:
    doc = _mapping(doc, path)
    gamma = _number(_key(doc, "gamma", path), f"{path}.gamma")
    _require(gamma > 0, CODE_GAMMA, f"{path}.gamma",
             f"adjustment weight must be positive, got {gamma}")
    y_nat = _vector(_key(doc, "y_nat", path), n, f"{path}.y_nat")
    cap = _mapping(_key(doc, "capacity", path), f"{path}.capacity")
    lo = _vector(_key(cap, "lo", f"{path}.capacity"), n, f"{path}.capacity.lo")
    hi = _vector(_key(cap, "hi", f"{path}.capacity"), n, f"{path}.capacity.hi")
    _require(bool(np.all(lo >= 0)), CODE_BOUNDS, f"{path}.capacity.lo",
             "capacity lower bounds must be nonnegative")
    bad = np.nonzero(lo > hi)[0]
    _require(bad.size == 0, CODE_BOUNDS, f"{path}.capacity",
             f"lo > hi at good {bad[0] + 1}" if bad.size else "")
    cost = _mapping(_key(doc, "base_cost", path), f"{path}.base_cost")
    kind = _key(cost, "kind", f"{path}.base_cost")
    _require(kind in ("linear", "quadratic"), CODE_MALFORMED,
             f"{path}.base_cost.kind", f"unknown base cost kind {kind!r}")
    c = _vector(_key(cost, "c", f"{path}.base_cost"), n, f"{path}.base_cost.c")
    if kind == "quadratic":
        d = _vector(_key(cost, "d", f"{path}.base_cost"), n, f"{path}.base_cost.d")
        _require(bool(np.all(d >= 0)), CODE_MALFORMED, f"{path}.base_cost.d",
                 "quadratic coefficients must be nonnegative")
    else:
        d = np.zeros(n)
    return Supplier(y_nat=y_nat, gamma=gamma, lo=lo, hi=hi, c=c, d=d)


def market_from_document(doc: Any) -> Market:
    """Validate a spec document and build the Market it describes."""
    doc = _mapping(doc, "$")
    n_raw = _key(doc, "n", "$")
    _require(isinstance(n_raw, int) and not isinstance(n_raw, bool) and n_raw >= 1,
             CODE_MALFORMED, "$.n", f"expected a positive integer, got {n_raw!r}")
    n = int(n_raw)
    consumers_doc = _key(doc, "consumers", "$")
    _require(isinstance(consumers_doc, list) and consumers_doc, CODE_MALFORMED,
             "$.consumers", "expected a nonempty array")
    suppliers_doc = _key(doc, "suppliers", "$")
    _require(isinstance(suppliers_doc, list) and suppliers_doc, CODE_MALFORMED,
             "$.suppliers", "expected a nonempty array")
    consumers = tuple(
        _parse_consumer(c, n, f"$.consumers[{j}]") for j, c in enumerate(consumers_doc)
    )
    suppliers = tuple(
        _parse_supplier(s, n, f"$.suppliers[{k}]") for k, s in enumerate(suppliers_doc)
    )
    try:
        return Market(n=n, consumers=consumers, suppliers=suppliers)
    except StructureError as exc:  # anything the field checks above missed
        raise SpecError(CODE_MALFORMED, "$", str(exc)) from exc


def market_to_document(m: Market) -> dict:
    """Spec document for a Market (1-based indices, plain Python types)."""
    consumers = []
    for ct in m.consumers:
        nests = [
            {"members": [i + 1 for i in nest], "mu": float(mu)}
            for nest, mu in zip(ct.nests.nests, ct.nests.mu)
        ]
        consumers.append(
            {"count": float(ct.count), "utilities": [float(x) for x in ct.a],
             "nests": nests}
        )
    suppliers = []
    for s in m.suppliers:
        cost: dict[str, Any] = {"c": [float(x) for x in s.c]}
        if np.any(s.d != 0):
            cost["kind"] = "quadratic"
            cost["d"] = [float(x) for x in s.d]
        else:
            cost["kind"] = "linear"
        suppliers.append(
            {"gamma": float(s.gamma),
             "y_nat": [float(x) for x in s.y_nat],
             "capacity": {"lo": [float(x) for x in s.lo],
                          "hi": [float(x) for x in s.hi]},
             "base_cost": cost}
        )
    return {"n": m.n, "consumers": consumers, "suppliers": suppliers}


def dumps_document(doc: dict) -> str:
    """Canonical serialization: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_market(path: str) -> Market:
    """Read and validate a market spec file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise SpecError(CODE_MALFORMED, "$", f"invalid JSON: {exc}") from exc
    return market_from_document(doc)


def save_document(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_document(doc))


# ---------------------------------------------------------------------------
# scenario generation


def random_nest_structure(
    n: int,
    rng: np.random.Generator,
    max_nests: int = 4,
    mu_range: tuple[float, float] = (0.2, 1.0),
    unit_mu_prob: float = 0.25,
) -> NestStructure:
    """Random partition of n alternatives with scales in mu_range.

    Each nest's mu is set exactly to 1.0 with probability unit_mu_prob
    so the multinomial branch stays exercised.
    """
    n_nests = int(rng.integers(1, min(max_nests, n) + 1))
    perm = rng.permutation(n)
    if n_nests > 1:
        cuts = np.sort(rng.choice(np.arange(1, n), size=n_nests - 1, replace=False))
    else:
        cuts = np.array([], dtype=int)
    pieces = np.split(perm, cuts)
    mus = []
    for _ in range(n_nests):
        if rng.random() < unit_mu_prob:
            mus.append(1.0)
        else:
            mus.append(float(rng.uniform(*mu_range)))
    return NestStructure(n, tuple(tuple(int(i) for i in piece) for piece in pieces),
                         tuple(mus))


def generate_market(n: int, n_consumers: int, n_suppliers: int, seed: int) -> dict:
    """Random market spec document, deterministic per seed.

    Capacities are scaled so each good's total capacity is twice the
    total population, which guarantees the productivity check passes.
    Scale parameters fall in [0.2, 1], observable utilities in [-2, 2].
    """
    if n < 1 or n_consumers < 1 or n_suppliers < 1:
        raise ValueError("n, consumer and supplier counts must all be >= 1")
    rng = np.random.default_rng(seed)
    consumers = []
    for _ in range(n_consumers):
        count = float(rng.integers(8, 21))
        a = rng.uniform(-2.0, 2.0, n)
        ns = random_nest_structure(n, rng)
        consumers.append(ConsumerType(count=count, a=a, nests=ns))
    total_pop = sum(ct.count for ct in consumers)

    raw_hi = rng.uniform(0.5, 1.5, (n_suppliers, n))
    hi = raw_hi * (2.0 * total_pop / raw_hi.sum(axis=0))
    suppliers = []
    for k in range(n_suppliers):
        gamma = float(rng.uniform(1.0, 4.0))
        c = rng.uniform(0.5, 2.0, n)
        d = rng.uniform(0.1, 1.0, n) if rng.random() < 0.5 else np.zeros(n)
        # natural levels well below the per-good demand scale keep
        # supply price-driven, so equilibria sit at positive prices
        # rather than on the boundary of the orthant
        y_nat = rng.uniform(0.0, 0.5, n) * (total_pop / (n * n_suppliers))
        suppliers.append(
            Supplier(y_nat=y_nat, gamma=gamma, lo=np.zeros(n), hi=hi[k], c=c, d=d)
        )
    market = Market(n=n, consumers=tuple(consumers), suppliers=tuple(suppliers))
    return market_to_document(market)


# ---------------------------------------------------------------------------
# trace files

TRACE_HEADER = "iter,ter,grad_norm,min_excess,complementarity,step"


@dataclass
class TraceTable:
    """Numeric columns of a trace file, as read back for rate fitting."""

    iter: np.ndarray
    ter: np.ndarray
    grad_norm: np.ndarray
    min_excess: np.ndarray
    complementarity: np.ndarray
    step: np.ndarray
    price: np.ndarray


def _fmt(x: float) -> str:
    # 17 significant digits: every float64 round-trips exactly
    return f"{x:.16e}"


def write_trace(trace, path: str) -> None:
    """Write a solver trace as CSV with the final price in a comment footer."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(TRACE_HEADER + "\n")
        for t in range(trace.iterations):
            row = (t + 1, trace.ter[t], trace.grad_norm[t], trace.min_excess[t],
                   trace.complementarity[t], trace.steps[t])
            f.write(",".join([str(row[0])] + [_fmt(x) for x in row[1:]]) + "\n")
        f.write("# price = [" + ", ".join(_fmt(x) for x in trace.price) + "]\n")


def read_trace(path: str) -> TraceTable:
    """Read a trace file back; lossless for values written by write_trace."""
    iters: list[int] = []
    cols: list[list[float]] = [[], [], [], [], []]
    price: np.ndarray | None = None
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("price"):
                    inner = body.split("=", 1)[1].strip().strip("[]")
                    price = np.array(
                        [float(x) for x in inner.split(",")] if inner else []
                    )
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"malformed trace row: {line!r}")
            iters.append(int(parts[0]))
            for col, text in zip(cols, parts[1:]):
                col.append(float(text))
    if price is None:
        raise ValueError("trace file has no price footer")
    return TraceTable(
        iter=np.array(iters, dtype=int),
        ter=np.array(cols[0]),
        grad_norm=np.array(cols[1]),
        min_excess=np.array(cols[2]),
        complementarity=np.array(cols[3]),
        step=np.array(cols[4]),
        price=price,
    )
