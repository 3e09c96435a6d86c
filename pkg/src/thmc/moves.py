"""The five move families, their validators, enumerators, and the proposal sampler.

A move is a signed integer table z with A z = 0: adding it to a frequency
table preserves the transition statistic whenever no count goes negative.
Four families additionally preserve the initial-state frequencies; type II
degree-one moves and degree-3 sliding moves shift them by exactly one path.

Times are 1-based throughout, matching the (state, time) node convention of
move graphs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import (
    MIN_T,
    Path,
    PathTable,
    TransitionStat,
    all_paths,
    as_path,
    encode,
    path_str,
    transitions,
)

#: Default cap on the path length accepted by the family enumerators.
ENUMERATION_T_CAP = 6


class Family(str, Enum):
    """Move family tags; the values are the tokens the CLI accepts."""

    TYPE1_DEG1 = "type1"
    CROSSING = "crossing"
    TWO_BY_TWO = "2x2"
    TYPE4 = "type4"
    TYPE2_DEG1 = "type2"
    DEG3_SLIDING = "deg3-sliding"


FAMILIES: tuple[Family, ...] = tuple(Family)

#: Families that preserve the initial-state frequencies.
INITIAL_PRESERVING = frozenset(
    {Family.TYPE1_DEG1, Family.CROSSING, Family.TWO_BY_TWO, Family.TYPE4}
)


class MoveError(ValueError):
    """A move constructor's preconditions failed or the move degenerates to zero."""


class NegativityViolation(ValueError):
    """Applying a move would drive some count negative; the step must be rejected."""

    def __init__(self, path: Path, count: int) -> None:
        self.path = path
        self.count = count
        super().__init__(
            f"applying move drives count of path {path_str(path)} to {count}"
        )


@dataclass(frozen=True)
class Move:
    """A signed sparse integer table with balanced, statistic-preserving parts.

    ``deltas`` holds (path, nonzero signed count) pairs in encoding order.
    Construction verifies that the positive and negative parts carry the
    same total mass and the same transition statistic.
    """

    T: int
    family: Family
    deltas: tuple[tuple[Path, int], ...]

    def __post_init__(self) -> None:
        if not self.deltas:
            raise MoveError("zero move")
        last = -1
        pos = TransitionStat(0, 0, 0, 0)
        neg = TransitionStat(0, 0, 0, 0)
        pos_mass = neg_mass = 0
        for path, delta in self.deltas:
            as_path(path, self.T)
            idx = encode(path)
            if idx <= last:
                raise ValueError("move deltas must be sorted by path encoding")
            last = idx
            if delta == 0:
                raise ValueError("move deltas must be nonzero")
            t = transitions(path)
            if delta > 0:
                pos_mass += delta
                pos = pos + TransitionStat(*(delta * v for v in t.as_tuple()))
            else:
                neg_mass -= delta
                neg = neg + TransitionStat(*(-delta * v for v in t.as_tuple()))
        if pos_mass != neg_mass:
            raise ValueError(
                f"unbalanced move: +{pos_mass} vs -{neg_mass} total mass"
            )
        if pos != neg:
            raise ValueError(
                f"move does not preserve the transition statistic: "
                f"{pos.as_tuple()} vs {neg.as_tuple()}"
            )

    @cached_property
    def degree(self) -> int:
        """Total count of the positive (equivalently negative) part."""
        return sum(d for _, d in self.deltas if d > 0)

    @cached_property
    def positive(self) -> PathTable:
        return PathTable(self.T, {p: d for p, d in self.deltas if d > 0})

    @cached_property
    def negative(self) -> PathTable:
        return PathTable(self.T, {p: -d for p, d in self.deltas if d < 0})

    @cached_property
    def initial_shift(self) -> int:
        """Change in the initial-state-1 frequency when the move is added."""
        return sum(d for p, d in self.deltas if p[0] == 1)

    def canonical_items(self) -> tuple[tuple[Path, int], ...]:
        """Deltas with the global sign normalized.

        The sign is chosen so the support path with the smallest encoding
        carries a positive delta; used as the deduplication key.
        """
        if self.deltas[0][1] > 0:
            return self.deltas
        return tuple((p, -d) for p, d in self.deltas)

    def canonical(self) -> "Move":
        items = self.canonical_items()
        return self if items is self.deltas else Move(self.T, self.family, items)

    def __neg__(self) -> "Move":
        return Move(self.T, self.family, tuple((p, -d) for p, d in self.deltas))

    def __repr__(self) -> str:
        return f"Move({self.family.value}, {format_move(self)!r})"


def format_move(move: Move) -> str:
    """Line-oriented text form: signed count and path, e.g. '+1 1121  -1 1211'."""
    pos = [(p, d) for p, d in move.deltas if d > 0]
    neg = [(p, d) for p, d in move.deltas if d < 0]
    return "  ".join(f"{d:+d} {path_str(p)}" for p, d in pos + neg)


def _collect(T: int, family: Family, signed: Iterable[tuple[Path, int]]) -> Move:
    """Accumulate signed path contributions, drop cancellations, build the move."""
    acc: dict[Path, int] = {}
    for path, delta in signed:
        acc[path] = acc.get(path, 0) + delta
    items = tuple(
        sorted(((p, d) for p, d in acc.items() if d), key=lambda kv: encode(kv[0]))
    )
    if not items:
        raise MoveError("move degenerates to zero")
    return Move(T, family, items)


# ---------------------------------------------------------------------------
# Constructors


def type1_deg1(path: Iterable[int], t0: int, t1: int, t2: int) -> Move:
    """Degree-one move rearranging one path between three visits to a state.

    Requires s_{t0} = s_{t1} = s_{t2} = i with t0 < t1 < t2 and some state
    different from i strictly between t0 and t2.  The returned move carries
    +1 on the path and -1 on the path with the segment [t0, t2] reordered to
    (s_{t1}..s_{t2-1}, s_{t0}..s_{t1}); both initial frequencies and the
    transition statistic are preserved.
    """
    path = as_path(path)
    T = len(path)
    if not (1 <= t0 < t1 < t2 <= T):
        raise MoveError(f"times must satisfy 1 <= t0 < t1 < t2 <= {T}")
    i = path[t0 - 1]
    if path[t1 - 1] != i or path[t2 - 1] != i:
        raise MoveError("path must visit the same state at t0, t1 and t2")
    if not any(path[t - 1] != i for t in range(t0 + 1, t2)):
        raise MoveError("path must leave the pivot state strictly between t0 and t2")
    swapped = (
        path[: t0 - 1] + path[t1 - 1 : t2 - 1] + path[t0 - 1 : t1] + path[t2:]
    )
    if swapped == path:
        raise MoveError("move degenerates to zero")
    return _collect(T, Family.TYPE1_DEG1, [(path, +1), (swapped, -1)])


def crossing_swap(path1: Iterable[int], path2: Iterable[int], t: int) -> Move:
    """Suffix exchange between two paths meeting at the node (i, t).

    The move graph of the result has no edge: the two sides carry exactly
    the same per-time transition counts.
    """
    p1 = as_path(path1)
    p2 = as_path(path2, len(p1))
    T = len(p1)
    if not 1 <= t <= T:
        raise MoveError(f"t must lie in 1..{T}")
    if p1[t - 1] != p2[t - 1]:
        raise MoveError(f"paths do not meet at time {t}")
    q1 = p1[:t] + p2[t:]
    q2 = p2[:t] + p1[t:]
    return _collect(
        T, Family.CROSSING, [(p1, +1), (p2, +1), (q1, -1), (q2, -1)]
    )


_2X2_WINDOWS = {
    # pattern -> ((path1 window at t0, path1 window at t1),
    #             (path2 window at t0, path2 window at t1))
    "A": (((1, 1), (1, 2)), ((2, 2), (2, 1))),
    "B": (((1, 1), (2, 1)), ((2, 2), (1, 2))),
}


def _paste_windows(
    T: int,
    t0: int,
    t1: int,
    w0: tuple[int, int],
    w1: tuple[int, int],
    prefix: Path,
    interior: Path,
    suffix: Path,
) -> Path:
    if len(prefix) != t0 - 1:
        raise MoveError(f"prefix must have length {t0 - 1}, got {len(prefix)}")
    if len(suffix) != T - t1 - 1:
        raise MoveError(f"suffix must have length {T - t1 - 1}, got {len(suffix)}")
    if t1 == t0 + 1:
        if interior:
            raise MoveError("no interior positions exist when t1 == t0 + 1")
        if w0[1] != w1[0]:
            raise MoveError("window states conflict at the shared position")
        return prefix + (w0[0], w0[1], w1[1]) + suffix
    if len(interior) != t1 - t0 - 2:
        raise MoveError(
            f"interior must have length {t1 - t0 - 2}, got {len(interior)}"
        )
    return prefix + w0 + interior + w1 + suffix


def two_by_two_swap(
    T: int,
    pattern: str,
    t0: int,
    t1: int,
    prefix1: Iterable[int] = (),
    interior1: Iterable[int] = (),
    suffix1: Iterable[int] = (),
    prefix2: Iterable[int] = (),
    interior2: Iterable[int] = (),
    suffix2: Iterable[int] = (),
) -> Move:
    """Degree-two move exchanging the interior segments of two paths.

    The two paths carry anti-aligned transition windows at t0 and t1:
    pattern 'A' puts (1,1)@t0, (1,2)@t1 on the first path against
    (2,2)@t0, (2,1)@t1 on the second; pattern 'B' uses (1,1), (2,1) against
    (2,2), (1,2).  Exchanging positions t0+1..t1 between the paths yields a
    move whose graph is +-{11,22} at t0 against -+{12,21}, reversed at t1.
    Contexts fill the positions the pattern does not force.
    """
    if pattern not in _2X2_WINDOWS:
        raise MoveError(f"pattern must be 'A' or 'B', got {pattern!r}")
    if T < MIN_T:
        raise MoveError(f"T must be >= {MIN_T}")
    if not (1 <= t0 < t1 <= T - 1):
        raise MoveError(f"times must satisfy 1 <= t0 < t1 <= {T - 1}")
    (w10, w11), (w20, w21) = _2X2_WINDOWS[pattern]
    ctx = [tuple(int(s) for s in c) for c in
           (prefix1, interior1, suffix1, prefix2, interior2, suffix2)]
    for c in ctx:
        for s in c:
            if s not in (1, 2):
                raise MoveError(f"context states must be 1 or 2, got {s}")
    p1 = _paste_windows(T, t0, t1, w10, w11, ctx[0], ctx[1], ctx[2])
    p2 = _paste_windows(T, t0, t1, w20, w21, ctx[3], ctx[4], ctx[5])
    q1 = p1[:t0] + p2[t0:t1] + p1[t1:]
    q2 = p2[:t0] + p1[t0:t1] + p2[t1:]
    return _collect(
        T, Family.TWO_BY_TWO, [(p1, +1), (p2, +1), (q1, -1), (q2, -1)]
    )


def type4_move(
    T: int,
    t0: int,
    t1: int,
    prefix1: Iterable[int] = (),
    suffix1: Iterable[int] = (),
    prefix2: Iterable[int] = (),
    suffix2: Iterable[int] = (),
    swap_states: bool = False,
) -> Move:
    """Width-3 window trade between two paths, swapping (1,1,2) against (1,2,2).

    The first path carries the window (1,1,2) at positions t0..t0+2, the
    second carries (1,2,2) at t1..t1+2; the move replaces the first window
    by (1,2,2) and the second by (1,1,2), trading one 1->1 transition for
    one 2->2 between the paths.  With ``swap_states`` the windows become
    (2,2,1) and (2,1,1); ranging over ordered (t0, t1) pairs this also
    realizes the time reflections.  Coincident paths accumulate into
    multiplicity-2 deltas.
    """
    if T < 4:
        raise MoveError("window trades need T >= 4")
    if t0 == t1:
        raise MoveError("t0 and t1 must differ")
    for t in (t0, t1):
        if not 1 <= t <= T - 2:
            raise MoveError(f"width-3 window at t={t} does not fit in T={T}")
    win_a, win_b = ((1, 1, 2), (1, 2, 2))
    if swap_states:
        win_a, win_b = ((2, 2, 1), (2, 1, 1))
    ctx = [tuple(int(s) for s in c) for c in (prefix1, suffix1, prefix2, suffix2)]
    for c in ctx:
        for s in c:
            if s not in (1, 2):
                raise MoveError(f"context states must be 1 or 2, got {s}")
    if len(ctx[0]) != t0 - 1 or len(ctx[1]) != T - t0 - 2:
        raise MoveError("path-1 context lengths do not match t0")
    if len(ctx[2]) != t1 - 1 or len(ctx[3]) != T - t1 - 2:
        raise MoveError("path-2 context lengths do not match t1")
    p1 = ctx[0] + win_a + ctx[1]
    p2 = ctx[2] + win_b + ctx[3]
    q1 = ctx[0] + win_b + ctx[1]
    q2 = ctx[2] + win_a + ctx[3]
    return _collect(T, Family.TYPE4, [(p1, +1), (p2, +1), (q1, -1), (q2, -1)])


def type2_deg1(path: Iterable[int], t: int) -> Move:
    """Degree-one rotation of a non-flat cycle, shifting one initial state.

    Requires s_1 = s_T = i and s_t = j != i for the given 1 < t < T.  The
    move carries +1 on the path and -1 on its rotation
    (s_t, ..., s_{T-1}, s_1, ..., s_t), which starts at j: the transition
    statistic is preserved while the initial frequencies shift by one path
    from i to j.
    """
    path = as_path(path)
    T = len(path)
    if not 1 < t < T:
        raise MoveError(f"t must satisfy 1 < t < {T}")
    if path[0] != path[-1]:
        raise MoveError("path must start and end at the same state")
    if path[t - 1] == path[0]:
        raise MoveError("path must visit the other state at time t")
    rotated = path[t - 1 : T - 1] + path[:t]
    return _collect(T, Family.TYPE2_DEG1, [(path, +1), (rotated, -1)])


def _flat(T: int, state: int) -> Path:
    return (state,) * T

def _single_step(T: int, k: int) -> Path:
    """k ones then T-k twos: the single step from 1 to 2 at time k."""
    return (1,) * k + (2,) * (T - k)


def deg3_sliding(
    T: int,
    a: int,
    b: int,
    u: int,
    state_swap: bool = False,
    time_reverse: bool = False,
) -> Move:
    """Degree-3 sliding move between a flat path and two single-step paths.

    For 1 <= a <= b <= T-1 with a + b <= T-1 and b <= u <= T-1-a, the
    positive side is {flat-1, step@a, step@b} and the negative side is
    {flat-2, step@(a+u), step@(b+T-1-u)} (multisets; coincident paths
    accumulate).  The initial frequencies shift by (+1, -1).  The flags
    produce the state-swapped and time-reversed variants.
    """
    if not (1 <= a <= b <= T - 1):
        raise MoveError(f"need 1 <= a <= b <= {T - 1}")
    if a + b > T - 1:
        raise MoveError(f"need a + b <= {T - 1}")
    if not (b <= u <= T - 1 - a):
        raise MoveError(f"u must lie in [{b}, {T - 1 - a}]")
    w_pos = [_flat(T, 1), _single_step(T, a), _single_step(T, b)]
    w_neg = [_flat(T, 2), _single_step(T, a + u), _single_step(T, b + T - 1 - u)]

    def variant(p: Path) -> Path:
        if state_swap:
            p = tuple(3 - s for s in p)
        if time_reverse:
            p = p[::-1]
        return p

    signed = [(variant(p), +1) for p in w_pos] + [(variant(p), -1) for p in w_neg]
    return _collect(T, Family.DEG3_SLIDING, signed)


# ---------------------------------------------------------------------------
# Move graphs and application


@dataclass(frozen=True)
class MoveGraph:
    """Per-time signed transition deltas z^t_{ij} of a move.

    ``steps[t-1]`` is the 4-tuple (z11, z12, z21, z22) at time t; edges of
    a drawn move graph are the nonzero entries, solid for positive and
    dotted for negative, labeled with the magnitude when it exceeds one.
    """

    T: int
    steps: tuple[tuple[int, int, int, int], ...]

    def total(self) -> tuple[int, int, int, int]:
        """Sum over time of each transition delta (zero for any valid move)."""
        return tuple(sum(col) for col in zip(*self.steps))  # type: ignore[return-value]

    def is_empty(self) -> bool:
        return all(v == 0 for step in self.steps for v in step)


def move_graph(move: Move) -> MoveGraph:
    """Per-time transition deltas of a move."""
    steps = [[0, 0, 0, 0] for _ in range(move.T - 1)]
    for path, delta in move.deltas:
        for t, (a, c) in enumerate(zip(path, path[1:])):
            steps[t][(a - 1) * 2 + (c - 1)] += delta
    return MoveGraph(move.T, tuple(tuple(s) for s in steps))


def apply_move(table: PathTable, move: Move, sign: int = 1) -> PathTable:
    """table + sign * move, raising :class:`NegativityViolation` when infeasible.

    The violation names the first offending path in encoding order, the
    signal that an MCMC proposal must be rejected (the chain stays put).
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if table.T != move.T:
        raise ValueError(f"table has T={table.T}, move has T={move.T}")
    counts = dict(table.counts)
    for path, delta in move.deltas:
        new = counts.get(path, 0) + sign * delta
        if new < 0:
            raise NegativityViolation(path, new)
        counts[path] = new
    return PathTable(table.T, counts)


# ---------------------------------------------------------------------------
# Enumeration


def _dedup(moves: Iterable[Move]) -> list[Move]:
    """Keep one move per canonical signed form, in deterministic order."""
    seen: dict[tuple, Move] = {}
    for m in moves:
        key = m.canonical_items()
        if key not in seen:
            seen[key] = m.canonical()
    return [seen[k] for k in sorted(seen, key=_items_sort_key)]


def _items_sort_key(items: tuple[tuple[Path, int], ...]):
    return tuple((encode(p), d) for p, d in items)


def _enumerate_type1(T: int) -> Iterable[Move]:
    for path in all_paths(T):
        for t0, t1, t2 in itertools.combinations(range(1, T + 1), 3):
            try:
                yield type1_deg1(path, t0, t1, t2)
            except MoveError:
                pass


def _enumerate_crossing(T: int) -> Iterable[Move]:
    paths = list(all_paths(T))
    for i, p1 in enumerate(paths):
        for p2 in paths[i:]:
            for t in range(1, T + 1):
                try:
                    yield crossing_swap(p1, p2, t)
                except MoveError:
                    pass


def _contexts(*lengths: int):
    bits = sum(lengths)
    for combo in itertools.product((1, 2), repeat=bits):
        out = []
        pos = 0
        for ln in lengths:
            out.append(combo[pos : pos + ln])
            pos += ln
        yield out


def _enumerate_2x2(T: int) -> Iterable[Move]:
    for t0 in range(1, T - 1):
        for t1 in range(t0 + 1, T):
            mid = max(t1 - t0 - 2, 0)
            for pattern in ("A", "B"):
                for pre1, mid1, suf1, pre2, mid2, suf2 in _contexts(
                    t0 - 1, mid, T - t1 - 1, t0 - 1, mid, T - t1 - 1
                ):
                    try:
                        yield two_by_two_swap(
                            T, pattern, t0, t1, pre1, mid1, suf1, pre2, mid2, suf2
                        )
                    except MoveError:
                        pass


def _enumerate_type4(T: int) -> Iterable[Move]:
    if T < 4:
        return
    for swap in (False, True):
        for t0 in range(1, T - 1):
            for t1 in range(1, T - 1):
                if t0 == t1:
                    continue
                for pre1, suf1, pre2, suf2 in _contexts(
                    t0 - 1, T - t0 - 2, t1 - 1, T - t1 - 2
                ):
                    try:
                        yield type4_move(
                            T, t0, t1, pre1, suf1, pre2, suf2, swap_states=swap
                        )
                    except MoveError:
                        pass


def _enumerate_type2(T: int) -> Iterable[Move]:
    for path in all_paths(T):
        for t in range(2, T):
            try:
                yield type2_deg1(path, t)
            except MoveError:
                pass


def _enumerate_deg3(T: int) -> Iterable[Move]:
    for a in range(1, T):
        for b in range(a, T - a):
            for u in range(b, T - a):
                for swap in (False, True):
                    for rev in (False, True):
                        try:
                            yield deg3_sliding(
                                T, a, b, u, state_swap=swap, time_reverse=rev
                            )
                        except MoveError:
                            pass


_ENUMERATORS = {
    Family.TYPE1_DEG1: _enumerate_type1,
    Family.CROSSING: _enumerate_crossing,
    Family.TWO_BY_TWO: _enumerate_2x2,
    Family.TYPE4: _enumerate_type4,
    Family.TYPE2_DEG1: _enumerate_type2,
    Family.DEG3_SLIDING: _enumerate_deg3,
}


@lru_cache(maxsize=None)
def _enumerate_family_cached(T: int, family: Family) -> tuple[Move, ...]:
    return tuple(_dedup(_ENUMERATORS[family](T)))


def enumerate_family(T: int, family: Family | str, cap: int = ENUMERATION_T_CAP) -> list[Move]:
    """All moves of one family at length T, deduplicated up to global sign.

    The sweep over each family's parameters is exhaustive, so the list is
    complete; T is capped (default 6) because the counts grow quickly.
    """
    if T < MIN_T:
        raise ValueError(f"T must be >= {MIN_T}, got {T}")
    if T > cap:
        raise ValueError(f"enumeration is capped at T <= {cap}, got {T}")
    return list(_enumerate_family_cached(T, Family(family)))


def enumerate_families(
    T: int, families: Iterable[Family | str] | None = None, cap: int = ENUMERATION_T_CAP
) -> list[Move]:
    """Concatenated family enumerations (all six families by default)."""
    fams = FAMILIES if families is None else tuple(Family(f) for f in families)
    out: list[Move] = []
    for fam in fams:
        out.extend(enumerate_family(T, fam, cap=cap))
    return out


# ---------------------------------------------------------------------------
# Random proposal sampling


def _normalize_weights(
    weights: Mapping[Family | str, float] | Sequence[float] | None,
) -> tuple[float, ...]:
    if weights is None:
        return tuple([1.0 / len(FAMILIES)] * len(FAMILIES))
    if isinstance(weights, Mapping):
        vec = [float(weights.get(f, weights.get(f.value, 0.0))) for f in FAMILIES]
    else:
        vec = [float(w) for w in weights]
        if len(vec) != len(FAMILIES):
            raise ValueError(f"expected {len(FAMILIES)} weights, got {len(vec)}")
    if any(w < 0 for w in vec):
        raise ValueError("family weights must be nonnegative")
    if abs(sum(vec) - 1.0) > 1e-9:
        raise ValueError(f"family weights must sum to 1, got {sum(vec)}")
    return tuple(vec)


class ProposalSampler:
    """Symmetric random proposal over all six families.

    A family is drawn by weight, its parameters uniformly from a
    table-independent space (times over their admissible ranges from T
    alone, states as fair bits), and a fair sign independently.  Parameter
    draws violating a family's preconditions yield a null proposal.  Since
    the sign is independent and fair, the induced distribution over signed
    moves satisfies q(z) = q(-z), and every constructible move of every
    family has positive probability.
    """

    def __init__(
        self,
        T: int,
        weights: Mapping[Family | str, float] | Sequence[float] | None = None,
    ) -> None:
        if T < MIN_T:
            raise ValueError(f"T must be >= {MIN_T}, got {T}")
        self.T = T
        self.weights = _normalize_weights(weights)
        self._cum = np.cumsum(self.weights)
        self._time_triples = list(itertools.combinations(range(1, T + 1), 3))
        self._2x2_pairs = [
            (t0, t1) for t0 in range(1, T - 1) for t1 in range(t0 + 1, T)
        ]
        max_ctx = 2 * max(T - 3, 0)
        self._highs = {
            Family.TYPE1_DEG1: np.array(
                [2] * T + [len(self._time_triples), 2], dtype=np.int64
            ),
            Family.CROSSING: np.array([2] * (2 * T) + [T, 2], dtype=np.int64),
            Family.TWO_BY_TWO: np.array(
                [2, len(self._2x2_pairs)] + [2] * max_ctx + [2], dtype=np.int64
            ),
            Family.TYPE4: np.array(
                [2, max(T - 2, 1), max(T - 2, 1)] + [2] * (2 * (T - 3)) + [2],
                dtype=np.int64,
            )
            if T >= 4
            else np.array([2], dtype=np.int64),
            Family.TYPE2_DEG1: np.array([2] * T + [T - 2, 2], dtype=np.int64),
            Family.DEG3_SLIDING: np.array(
                [T - 1, T - 1, T - 1, 2, 2, 2], dtype=np.int64
            ),
        }

    def sample(self, rng: np.random.Generator) -> Optional[tuple[Move, int]]:
        """One proposal draw: a (move, sign) pair or None."""
        fam = FAMILIES[int(np.searchsorted(self._cum, rng.random(), side="right"))]
        draws = rng.integers(0, self._highs[fam])
        try:
            move = self._build(fam, draws)
        except MoveError:
            return None
        sign = 1 if draws[-1] == 0 else -1
        return move, sign

    def _build(self, fam: Family, d: np.ndarray) -> Move:
        T = self.T
        if fam is Family.TYPE1_DEG1:
            path = tuple(int(v) + 1 for v in d[:T])
            t0, t1, t2 = self._time_triples[int(d[T])]
            return type1_deg1(path, t0, t1, t2)
        if fam is Family.CROSSING:
            p1 = tuple(int(v) + 1 for v in d[:T])
            p2 = tuple(int(v) + 1 for v in d[T : 2 * T])
            return crossing_swap(p1, p2, int(d[2 * T]) + 1)
        if fam is Family.TWO_BY_TWO:
            pattern = "A" if d[0] == 0 else "B"
            t0, t1 = self._2x2_pairs[int(d[1])]
            bits = [int(v) + 1 for v in d[2:-1]]
            mid = max(t1 - t0 - 2, 0)
            lens = (t0 - 1, mid, T - t1 - 1, t0 - 1, mid, T - t1 - 1)
            ctx, pos = [], 0
            for ln in lens:
                ctx.append(tuple(bits[pos : pos + ln]))
                pos += ln
            return two_by_two_swap(T, pattern, t0, t1, *ctx)
        if fam is Family.TYPE4:
            if T < 4:
                raise MoveError("window trades need T >= 4")
            swap = bool(d[0])
            t0, t1 = int(d[1]) + 1, int(d[2]) + 1
            bits = [int(v) + 1 for v in d[3:-1]]
            lens = (t0 - 1, T - t0 - 2, t1 - 1, T - t1 - 2)
            ctx, pos = [], 0
            for ln in lens:
                ctx.append(tuple(bits[pos : pos + ln]))
                pos += ln
            return type4_move(T, t0, t1, *ctx, swap_states=swap)
        if fam is Family.TYPE2_DEG1:
            path = tuple(int(v) + 1 for v in d[:T])
            return type2_deg1(path, int(d[T]) + 2)
        if fam is Family.DEG3_SLIDING:
            a, b, u = int(d[0]) + 1, int(d[1]) + 1, int(d[2]) + 1
            return deg3_sliding(
                T, a, b, u, state_swap=bool(d[3]), time_reverse=bool(d[4])
            )
        raise AssertionError(fam)


@lru_cache(maxsize=32)
def _sampler(T: int, weights: tuple[float, ...]) -> ProposalSampler:
    return ProposalSampler(T, weights)


def sample_proposal(
    T: int,
    rng: np.random.Generator,
    weights: Mapping[Family | str, float] | Sequence[float] | None = None,
) -> Optional[tuple[Move, int]]:
    """Draw one symmetric proposal; see :class:`ProposalSampler`."""
    return _sampler(T, _normalize_weights(weights)).sample(rng)
