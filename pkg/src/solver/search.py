"""Backtracking search over a GroundProblem.

Decisions are taken in three layers: generated-kind counts (smallest totals
first), catalogue rows for every active component, then the partner set of
each left component per connection. Synthesized ids of a kind are
interchangeable, which the search exploits in two places: their rows are
chosen in non-decreasing catalogue order, and among untouched synthesized
partners with equal rows only a prefix may be chosen.
"""
import operator
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

import structlog

from src.config.settings import DEFAULT_FUEL, DEFAULT_SEED
from src.model.errors import ContractError
from src.model.expr import (
    Arith, AttrRef, Compare, ConstraintExpr, IntLit, Logical, Side, Sum, SymLit, Term,
    contains_aggregate,
)
from src.model.types import (
    BinaryConnectionDef, CatalogueRow, ComponentInstance, ComponentKindDef, Configuration,
    ProblemSpec, Value,
)
from src.solver.grounding import GroundProblem

logger = structlog.get_logger(__name__)

Row = Tuple[Value, ...]

_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul}
_COMPARE = {
    "=": operator.eq, "!=": operator.ne, "<=": operator.le,
    "<": operator.lt, ">=": operator.ge, ">": operator.gt,
}
# a partial sum over non-negative values can only grow
_MIRROR = {">=": "<=", ">": "<", "=": "="}


class SolveStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    FUEL_EXHAUSTED = "fuel-exhausted"


@dataclass(frozen=True)
class SolveOptions:
    """Search options.

    ``count_strategy`` is ``"sweep"`` (smallest totals first) or an integer
    count applied to every generated kind.
    """
    max_solutions: int = 1
    fuel: int = DEFAULT_FUEL
    deterministic_seed: int = DEFAULT_SEED
    count_strategy: Union[str, int] = "sweep"

    def __post_init__(self) -> None:
        if self.max_solutions < 1:
            raise ContractError(f"max_solutions must be at least 1, got {self.max_solutions}")
        if self.fuel < 1:
            raise ContractError(f"fuel must be at least 1, got {self.fuel}")
        strategy = self.count_strategy
        if isinstance(strategy, bool) or not (strategy == "sweep" or (
                isinstance(strategy, int) and strategy >= 0)):
            raise ContractError(f"count_strategy must be 'sweep' or a count, got {strategy!r}")


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    configurations: Tuple[Configuration, ...] = ()
    nodes: int = 0


class _FuelExhausted(Exception):
    pass


# compiled constraints

@dataclass(frozen=True)
class _Compiled:
    aggregate: bool
    # per edge: (own row, partner row); aggregate: (own row, partner rows)
    check: Callable[[Row, object], bool]
    # aggregate only: True when no superset of the partners can satisfy the constraint
    prune: Optional[Callable[[Row, List[Row]], bool]] = None


def _compile_term(term: Term, own: Side, own_kind: ComponentKindDef,
                  partner_kind: ComponentKindDef) -> Callable[[Row, object], Value]:
    if isinstance(term, IntLit):
        value = term.value
        return lambda o, p: value
    if isinstance(term, SymLit):
        name = term.name
        return lambda o, p: name
    if isinstance(term, AttrRef):
        if term.side is own:
            idx = own_kind.attribute_index(term.attr)
            return lambda o, p: o[idx]
        idx = partner_kind.attribute_index(term.attr)
        return lambda o, p: p[idx]
    if isinstance(term, Sum):
        idx = partner_kind.attribute_index(term.attr)
        return lambda o, ps: sum(row[idx] for row in ps)
    if isinstance(term, Arith):
        fn = _ARITH[term.op]
        left = _compile_term(term.left, own, own_kind, partner_kind)
        right = _compile_term(term.right, own, own_kind, partner_kind)
        return lambda o, p: fn(left(o, p), right(o, p))
    raise ContractError(f"not a term: {term!r}")


def _compile_bool(expr: ConstraintExpr, own: Side, own_kind: ComponentKindDef,
                  partner_kind: ComponentKindDef) -> Callable[[Row, object], bool]:
    if isinstance(expr, Logical):
        left = _compile_bool(expr.left, own, own_kind, partner_kind)
        right = _compile_bool(expr.right, own, own_kind, partner_kind)
        if expr.op == "and":
            return lambda o, p: left(o, p) and right(o, p)
        return lambda o, p: left(o, p) or right(o, p)
    fn = _COMPARE[expr.op]
    left_term = _compile_term(expr.left, own, own_kind, partner_kind)
    right_term = _compile_term(expr.right, own, own_kind, partner_kind)
    return lambda o, p: fn(left_term(o, p), right_term(o, p))


def _conjuncts(expr: ConstraintExpr) -> Iterator[ConstraintExpr]:
    if isinstance(expr, Logical) and expr.op == "and":
        yield from _conjuncts(expr.left)
        yield from _conjuncts(expr.right)
    else:
        yield expr


def _compile_prune(spec: ProblemSpec, expr: ConstraintExpr, own: Side, own_kind: ComponentKindDef,
                   partner_kind: ComponentKindDef) -> Optional[Callable[[Row, List[Row]], bool]]:
    checks = []
    for part in _conjuncts(expr):
        if not isinstance(part, Compare):
            continue
        if isinstance(part.left, Sum) and not contains_aggregate(part.right) and part.op in ("<=", "<", "="):
            total, limit, op = part.left, part.right, part.op
        elif isinstance(part.right, Sum) and not contains_aggregate(part.left) and part.op in _MIRROR:
            total, limit, op = part.right, part.left, _MIRROR[part.op]
        else:
            continue
        idx = partner_kind.attribute_index(total.attr)
        values = {row.values[idx] for row in spec.catalogue_of(partner_kind.name)}
        if not all(isinstance(v, int) and v >= 0 for v in values):
            continue
        bound = _compile_term(limit, own, own_kind, partner_kind)
        if op == "<":
            checks.append(lambda o, ps, i=idx, b=bound: sum(r[i] for r in ps) >= b(o, ps))
        else:
            checks.append(lambda o, ps, i=idx, b=bound: sum(r[i] for r in ps) > b(o, ps))
    if not checks:
        return None
    return lambda o, ps: any(check(o, ps) for check in checks)


def compile_constraint(spec: ProblemSpec, expr: ConstraintExpr, own: Side,
                       own_kind: ComponentKindDef, partner_kind: ComponentKindDef) -> _Compiled:
    check = _compile_bool(expr, own, own_kind, partner_kind)
    if not contains_aggregate(expr):
        return _Compiled(aggregate=False, check=check)
    return _Compiled(aggregate=True, check=check,
                     prune=_compile_prune(spec, expr, own, own_kind, partner_kind))


# count vectors

def _vectors_with_total(ranges: Sequence[Tuple[int, int]], total: int) -> Iterator[Tuple[int, ...]]:
    lo, hi = ranges[0]
    if len(ranges) == 1:
        if lo <= total <= hi:
            yield (total,)
        return
    rest_lo = sum(r[0] for r in ranges[1:])
    rest_hi = sum(r[1] for r in ranges[1:])
    for first in range(max(lo, total - rest_hi), min(hi, total - rest_lo) + 1):
        for tail in _vectors_with_total(ranges[1:], total - first):
            yield (first,) + tail


def count_vectors(ranges: Sequence[Tuple[int, int]]) -> Iterator[Tuple[int, ...]]:
    """All count vectors within ``ranges``, by increasing total, then lexicographically."""
    if not ranges:
        yield ()
        return
    if any(lo > hi for lo, hi in ranges):
        return
    for total in range(sum(r[0] for r in ranges), sum(r[1] for r in ranges) + 1):
        yield from _vectors_with_total(ranges, total)


# search state

@dataclass
class _Component:
    kind: str
    id: str
    rows: Tuple[Row, ...]
    synthesized: bool
    previous_synthesized: Optional[int] = None


@dataclass
class _Connection:
    defn: BinaryConnectionDef
    lefts: List[int]
    rights: List[int]
    forward: Optional[_Compiled] = None
    backward: Optional[_Compiled] = None
    forced: Dict[int, Set[int]] = field(default_factory=dict)
    forbidden: Dict[int, Set[int]] = field(default_factory=dict)
    valid: bool = True
    remaining_after: Dict[int, int] = field(default_factory=dict)
    # one-to-many indexes counting partners of the left / right endpoint
    left_otms: List[int] = field(default_factory=list)
    right_otms: List[int] = field(default_factory=list)
    out: Dict[int, List[int]] = field(default_factory=dict)
    inn: Dict[int, List[int]] = field(default_factory=dict)


class _Search:
    def __init__(self, problem: GroundProblem, opts: SolveOptions) -> None:
        self.problem = problem
        self.spec = problem.spec
        self.opts = opts
        self.nodes = 0
        self.row_rank: Dict[str, Dict[CatalogueRow, int]] = {}
        rng = random.Random(opts.deterministic_seed)
        for kind in self.spec.kinds:
            rows = list(self.spec.catalogue_of(kind.name))
            if opts.deterministic_seed != 0:
                rng.shuffle(rows)
            self.row_rank[kind.name] = {row: i for i, row in enumerate(rows)}

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.opts.fuel:
            raise _FuelExhausted()

    def _rows_for(self, kind: str, ident: str) -> Tuple[Row, ...]:
        rank = self.row_rank[kind]
        rows = sorted(self.problem.rows_for(kind, ident), key=lambda r: rank.get(r, len(rank)))
        return tuple(r.values for r in rows)

    def run(self, counts: Dict[str, int]) -> Iterator[Configuration]:
        """Yield every configuration with exactly ``counts`` generated components, modulo symmetry."""
        self._setup(counts)
        if not all(conn.valid for conn in self.connections) or not self._counts_feasible():
            return
        yield from self._assign_rows(0)

    def _setup(self, counts: Dict[str, int]) -> None:
        spec, problem = self.spec, self.problem
        self.components: List[_Component] = []
        self.by_kind: Dict[str, List[int]] = {}
        self.index_of: Dict[Tuple[str, str], int] = {}
        for kind in spec.kinds:
            pool = problem.pools[kind.name]
            active = pool.active(counts[kind.name]) if pool.generated else pool.mandatory
            indices = []
            previous: Optional[int] = None
            for ident in active:
                synthesized = pool.generated and ident not in pool.mandatory
                index = len(self.components)
                self.components.append(_Component(
                    kind.name, ident, self._rows_for(kind.name, ident), synthesized,
                    previous if synthesized else None))
                if synthesized:
                    previous = index
                indices.append(index)
                self.index_of[(kind.name, ident)] = index
            self.by_kind[kind.name] = indices

        n = len(self.components)
        self.row_of: List[Optional[Row]] = [None] * n
        self.row_index: List[int] = [0] * n
        self.degree: List[int] = [0] * n
        self.otm_count = [[0] * n for _ in spec.one_to_many]
        self.otm_kinds: List[List[Dict[str, int]]] = [[{} for _ in range(n)] for _ in spec.one_to_many]

        self.connections: List[_Connection] = []
        for conn in spec.binary_connections:
            left_kind, right_kind = spec.kind(conn.left), spec.kind(conn.right)
            c = _Connection(conn, self.by_kind[conn.left], self.by_kind[conn.right])
            if conn.forward_constraint is not None:
                c.forward = compile_constraint(spec, conn.forward_constraint, Side.LEFT,
                                               left_kind, right_kind)
            if conn.backward_constraint is not None:
                c.backward = compile_constraint(spec, conn.backward_constraint, Side.RIGHT,
                                                right_kind, left_kind)
            for target, pairs in ((c.forced, problem.forced_edges.get(conn.name, ())),
                                  (c.forbidden, problem.forbidden_edges.get(conn.name, ()))):
                for left_id, right_id in pairs:
                    li = self.index_of.get((conn.left, left_id))
                    ri = self.index_of.get((conn.right, right_id))
                    if li is None or ri is None:
                        if target is c.forced:
                            c.valid = False
                        continue
                    target.setdefault(li, set()).add(ri)
            for position, left in enumerate(c.lefts):
                c.remaining_after[left] = len(c.lefts) - position - 1
            for i, otm in enumerate(spec.one_to_many):
                if conn.self_loop:
                    continue
                if otm.left == conn.left and conn.right in otm.rights:
                    c.left_otms.append(i)
                if otm.left == conn.right and conn.left in otm.rights:
                    c.right_otms.append(i)
            self.connections.append(c)

        self.tasks: List[Tuple[str, int, int]] = []
        for ci, c in enumerate(self.connections):
            self.tasks.extend(("left", ci, left) for left in c.lefts)
            self.tasks.append(("close", ci, -1))

    def _counts_feasible(self) -> bool:
        """Degree sums of every connection must be able to meet."""
        for c in self.connections:
            fwd, bwd = c.defn.forward, c.defn.backward
            n_left, n_right = len(c.lefts), len(c.rights)
            if bwd is None:
                if n_left and fwd.lower > n_left - 1:
                    return False
                continue
            if n_left * fwd.lower > n_right * bwd.upper:
                return False
            if n_right * bwd.lower > n_left * fwd.upper:
                return False
        return True

    # rows

    def _assign_rows(self, i: int) -> Iterator[Configuration]:
        if i == len(self.components):
            yield from self._assign_edges(0)
            return
        comp = self.components[i]
        start = 0
        if comp.previous_synthesized is not None:
            start = self.row_index[comp.previous_synthesized]
        for k in range(start, len(comp.rows)):
            self.tick()
            self.row_of[i] = comp.rows[k]
            self.row_index[i] = k
            yield from self._assign_rows(i + 1)
        self.row_of[i] = None

    # edges

    def _assign_edges(self, t: int) -> Iterator[Configuration]:
        if t == len(self.tasks):
            if self._one_to_many_ok():
                yield self._build()
            return
        step, ci, left = self.tasks[t]
        c = self.connections[ci]
        if step == "close":
            if self._close_ok(c):
                yield from self._assign_edges(t + 1)
            return
        for subset in self._subsets(c, left):
            self.tick()
            self._add(c, left, subset)
            if self._consistent(c, left, subset):
                yield from self._assign_edges(t + 1)
            self._remove(c, left, subset)

    def _edge_allowed(self, c: _Connection, left: int, right: int) -> bool:
        if c.defn.self_loop and left == right:
            return False
        if c.forward is not None and not c.forward.aggregate:
            if not c.forward.check(self.row_of[left], self.row_of[right]):
                return False
        if c.backward is not None and not c.backward.aggregate:
            if not c.backward.check(self.row_of[right], self.row_of[left]):
                return False
        backward = c.defn.backward
        if backward is not None and len(c.inn.get(right, ())) >= backward.upper:
            return False
        return True

    def _subsets(self, c: _Connection, left: int) -> Iterator[List[int]]:
        forced = c.forced.get(left, set())
        forbidden = c.forbidden.get(left, set())
        if any(not self._edge_allowed(c, left, r) for r in forced):
            return
        candidates = [r for r in c.rights
                      if r not in forced and r not in forbidden and self._edge_allowed(c, left, r)]
        groups: List[List[int]] = []
        group_of: Dict[Row, int] = {}
        for r in candidates:
            comp = self.components[r]
            if comp.synthesized and self.degree[r] == 0 and r not in c.out:
                key = self.row_of[r]
                if key in group_of:
                    groups[group_of[key]].append(r)
                    continue
                group_of[key] = len(groups)
            groups.append([r])
        fwd = c.defn.forward
        lo = max(fwd.lower, len(forced))
        hi = min(fwd.upper, len(forced) + len(candidates))
        base = sorted(forced)
        for size in range(lo, hi + 1):
            for choice in _group_choices(groups, 0, size - len(forced)):
                yield sorted(base + choice)

    def _add(self, c: _Connection, left: int, subset: List[int]) -> None:
        c.out[left] = subset
        incoming = c.inn
        for r in subset:
            incoming.setdefault(r, []).append(left)
            self.degree[r] += 1
        self.degree[left] += len(subset)
        right_kind, left_kind = c.defn.right, c.defn.left
        for i in c.left_otms:
            self.otm_count[i][left] += len(subset)
            kinds = self.otm_kinds[i][left]
            kinds[right_kind] = kinds.get(right_kind, 0) + len(subset)
        for i in c.right_otms:
            for r in subset:
                self.otm_count[i][r] += 1
                kinds = self.otm_kinds[i][r]
                kinds[left_kind] = kinds.get(left_kind, 0) + 1

    def _remove(self, c: _Connection, left: int, subset: List[int]) -> None:
        del c.out[left]
        incoming = c.inn
        for r in subset:
            incoming[r].pop()
            self.degree[r] -= 1
        self.degree[left] -= len(subset)
        right_kind, left_kind = c.defn.right, c.defn.left
        for i in c.left_otms:
            self.otm_count[i][left] -= len(subset)
            kinds = self.otm_kinds[i][left]
            kinds[right_kind] -= len(subset)
            if not kinds[right_kind]:
                del kinds[right_kind]
        for i in c.right_otms:
            for r in subset:
                self.otm_count[i][r] -= 1
                kinds = self.otm_kinds[i][r]
                kinds[left_kind] -= 1
                if not kinds[left_kind]:
                    del kinds[left_kind]

    def _otm_within(self, i: int, comp: int) -> bool:
        otm = self.spec.one_to_many[i]
        if otm.card.upper is not None and self.otm_count[i][comp] > otm.card.upper:
            return False
        return not (otm.exclusive and len(self.otm_kinds[i][comp]) > 1)

    def _consistent(self, c: _Connection, left: int, subset: List[int]) -> bool:
        if c.forward is not None and c.forward.aggregate:
            if not c.forward.check(self.row_of[left], [self.row_of[r] for r in subset]):
                return False
        incoming = c.inn
        if c.backward is not None and c.backward.prune is not None:
            for r in subset:
                partners = [self.row_of[l] for l in incoming[r]]
                if c.backward.prune(self.row_of[r], partners):
                    return False
        if not all(self._otm_within(i, left) for i in c.left_otms):
            return False
        if not all(self._otm_within(i, r) for i in c.right_otms for r in subset):
            return False
        backward = c.defn.backward
        if backward is not None and backward.lower > 0:
            remaining = c.remaining_after[left]
            demand = 0
            for r in c.rights:
                need = backward.lower - len(incoming.get(r, ()))
                if need > remaining:
                    return False
                demand += max(0, need)
            if demand > remaining * c.defn.forward.upper:
                return False
        return True

    def _close_ok(self, c: _Connection) -> bool:
        backward = c.defn.backward
        if backward is None:
            return True
        incoming = c.inn
        for r in c.rights:
            partners = incoming.get(r, [])
            if not backward.admits(len(partners)):
                return False
            if c.backward is not None and c.backward.aggregate:
                if not c.backward.check(self.row_of[r], [self.row_of[l] for l in partners]):
                    return False
        return True

    def _one_to_many_ok(self) -> bool:
        for i, otm in enumerate(self.spec.one_to_many):
            for comp in self.by_kind[otm.left]:
                if not otm.card.admits(self.otm_count[i][comp]):
                    return False
                if otm.exclusive and len(self.otm_kinds[i][comp]) > 1:
                    return False
        return True

    def _build(self) -> Configuration:
        instances = {
            kind: tuple(ComponentInstance(self.components[i].id, CatalogueRow(self.row_of[i]))
                        for i in indices)
            for kind, indices in self.by_kind.items()
        }
        edges = {}
        for c in self.connections:
            pairs = set()
            for left, subset in c.out.items():
                left_id = self.components[left].id
                pairs.update((left_id, self.components[r].id) for r in subset)
            edges[c.defn.name] = frozenset(pairs)
        return Configuration(instances=instances, edges=edges)


def _group_choices(groups: List[List[int]], start: int, k: int) -> Iterator[List[int]]:
    """Pick ``k`` members, taking a prefix of every group; earlier groups are preferred."""
    if k == 0:
        yield []
        return
    if start == len(groups):
        return
    capacity = sum(len(g) for g in groups[start + 1:])
    group = groups[start]
    for take in range(min(len(group), k), max(0, k - capacity) - 1, -1):
        for rest in _group_choices(groups, start + 1, k - take):
            yield group[:take] + rest


def solve(problem: GroundProblem, opts: Optional[SolveOptions] = None) -> SolveResult:
    """Search ``problem`` for up to ``opts.max_solutions`` configurations.

    Raises:
        ContractError: If a fixed count lies outside a generated kind's bounds.
    """
    opts = opts or SolveOptions()
    generated = problem.generated_kinds
    if problem.infeasible_kinds:
        logger.info("Pool cannot hold the mandatory components", kinds=problem.infeasible_kinds)
        return SolveResult(SolveStatus.UNSAT)

    ranges = []
    for kind in generated:
        pool = problem.pools[kind]
        ranges.append((max(pool.lower, len(pool.mandatory)), pool.upper))
    if isinstance(opts.count_strategy, int):
        n = opts.count_strategy
        for kind in generated:
            pool = problem.pools[kind]
            if not pool.lower <= n <= pool.upper:
                raise ContractError(f"count {n} is outside the bounds [{pool.lower}, {pool.upper}] of {kind}")
        ranges = [(max(lo, n), n) for lo, _ in ranges]

    search = _Search(problem, opts)
    solutions: List[Configuration] = []
    try:
        for vector in count_vectors(ranges):
            counts = dict(zip(generated, vector))
            logger.debug("Trying counts", counts=counts, nodes=search.nodes)
            for config in search.run(counts):
                solutions.append(config)
                if len(solutions) >= opts.max_solutions:
                    return SolveResult(SolveStatus.SAT, tuple(solutions), search.nodes)
    except _FuelExhausted:
        if solutions:
            logger.warning("Fuel exhausted after partial results", found=len(solutions),
                           fuel=opts.fuel)
            return SolveResult(SolveStatus.SAT, tuple(solutions), search.nodes)
        logger.warning("Fuel exhausted", fuel=opts.fuel)
        return SolveResult(SolveStatus.FUEL_EXHAUSTED, (), search.nodes)
    status = SolveStatus.SAT if solutions else SolveStatus.UNSAT
    logger.info("Search finished", status=status.value, solutions=len(solutions), nodes=search.nodes)
    return SolveResult(status, tuple(solutions), search.nodes)
