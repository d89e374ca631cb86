"""Random compositions, partitions, strings and arrangements with reproducible streams."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from .arith import binom
from .combinat import Composition, Partition, binary_decode, enumerate_compositions, enumerate_partitions
from .decrement import DecrementMatrix

MAX_BREAKS = 10 ** 6


@dataclass(frozen=True)
class RngStream:
    """Stream ``index`` of master ``seed``; replicate i of a run always uses index i."""

    seed: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.index,))
        return np.random.Generator(np.random.Philox(ss))


def make_rng(rng: Union[np.random.Generator, RngStream, int, None]) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return RngStream(0 if rng is None else int(rng)).generator()


@dataclass(frozen=True)
class Paintbox:
    """Finite list of break points 0 < Y_1 < ... < 1; gaps are [Y_{k-1}, Y_k)."""

    breaks: Tuple[float, ...]
    meander: bool = False

    def __post_init__(self):
        ys = self.breaks
        if any(not 0 < y <= 1 for y in ys) or any(a >= b for a, b in zip(ys, ys[1:])):
            raise ValueError("break points must increase strictly inside (0, 1]")

    def gap_counts(self, u: np.ndarray) -> np.ndarray:
        """Number of points in each gap, left to right (empty gaps included)."""
        idx = np.searchsorted(np.asarray(self.breaks), u, side="right")
        return np.bincount(idx, minlength=len(self.breaks) + 1)


# ---------------------------------------------------------------- chain

def sample_chain(q: DecrementMatrix, n: int, rng) -> Composition:
    """Parts drawn one by one: at state s the next part is m with probability q(s:m)."""
    if n > q.N:
        raise ValueError(f"n={n} exceeds matrix level {q.N}")
    rng = make_rng(rng)
    parts, s = [], n
    while s > 0:
        m = bisect.bisect_right(q.cumulative(s), rng.random()) + 1
        m = min(m, s)
        parts.append(m)
        s -= m
    return Composition(parts)


# ---------------------------------------------------------------- stick-breaking

def stickbreaking_paintbox(w_sampler: Callable[[np.random.Generator], float], rng, stop_above: float) -> Paintbox:
    """Break points Y_k = 1 - prod_{i<=k}(1 - W_i) until one exceeds ``stop_above``."""
    rng = make_rng(rng)
    ys, rest = [], 1.0
    while True:
        w = float(w_sampler(rng))
        if not 0 < w <= 1:
            raise ValueError(f"stick-breaking factor {w} outside (0, 1]")
        rest *= 1 - w
        y = 1 - rest
        if ys and y <= ys[-1]:
            # factor too small to move the break in double precision
            y = ys[-1]
        else:
            ys.append(y)
        if y > stop_above or rest == 0:
            return Paintbox(tuple(ys))
        if len(ys) >= MAX_BREAKS:
            raise RuntimeError(f"stick-breaking needed more than {MAX_BREAKS} breaks; W is too close to 0")


def sample_stickbreaking(w_sampler: Callable[[np.random.Generator], float], n: int, rng,
                         with_gaps: bool = False):
    """Cluster n uniforms by the gaps of a stick-breaking paintbox and read counts left to right.

    With ``with_gaps`` also return M_n, the index of the rightmost occupied gap.
    """
    rng = make_rng(rng)
    u = rng.random(n)
    box = stickbreaking_paintbox(w_sampler, rng, float(u.max()))
    counts = box.gap_counts(u)
    occupied = np.nonzero(counts)[0]
    comp = Composition(int(c) for c in counts[occupied])
    if with_gaps:
        return comp, int(occupied[-1]) + 1
    return comp


def beta_w(a, b) -> Callable[[np.random.Generator], float]:
    a, b = float(a), float(b)
    return lambda rng: rng.beta(a, b)


def point_w(x) -> Callable[[np.random.Generator], float]:
    x = float(x)
    return lambda rng: x


# ---------------------------------------------------------------- restaurants

def check_crp_range(alpha, theta) -> None:
    alpha, theta = float(alpha), float(theta)
    if 0 <= alpha < 1 and theta > -alpha:
        return
    if alpha < 0 and theta > 0:
        k = -theta / alpha
        if abs(k - round(k)) < 1e-12:
            return
    raise ValueError(f"(alpha, theta) = ({alpha}, {theta}) is outside the principal range")


def sample_crp(alpha, theta, n: int, rng) -> Partition:
    """Customer j+1 joins table i w.p. (lambda_i - alpha)/(j + theta), else a new table."""
    check_crp_range(alpha, theta)
    rng = make_rng(rng)
    a, t = float(alpha), float(theta)
    tables: List[int] = []
    for j in range(n):
        k = len(tables)
        if rng.random() * (j + t) < t + k * a:
            tables.append(1)
        else:
            w = np.asarray(tables, dtype=float) - a
            i = int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(), side="right"))
            tables[min(i, k - 1)] += 1
    return Partition(tables)


def sample_ordered_crp_alpha_alpha(alpha, n: int, rng) -> Composition:
    """(alpha, alpha) restaurant whose new tables go to a uniform slot among the k+1 gaps."""
    a = float(alpha)
    if not 0 < a < 1:
        raise ValueError("ordered (alpha, alpha) restaurant needs 0 < alpha < 1")
    rng = make_rng(rng)
    row: List[int] = []
    for j in range(n):
        k = len(row)
        if rng.random() * (j + a) < a + k * a:
            row.insert(int(rng.integers(0, k + 1)), 1)
        else:
            w = np.asarray(row, dtype=float) - a
            i = int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(), side="right"))
            row[min(i, k - 1)] += 1
    return Composition(row)


# ---------------------------------------------------------------- q-chain on compositions / partitions

def qchain_step(c: Union[Composition, Partition], q_row: Sequence, rng):
    """Remove m ~ q(n:.) balls uniformly, drop emptied boxes, add a box of size m."""
    rng = make_rng(rng)
    n = sum(c)
    if len(q_row) != n:
        raise ValueError("q_row must be the row q(n:.) for n = |c|")
    cum = np.cumsum([float(x) for x in q_row])
    m = min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")) + 1, n)
    removed = rng.multivariate_hypergeometric(list(c), m)
    rest = [p - r for p, r in zip(c, removed) if p - r > 0]
    if isinstance(c, Partition):
        return Partition(rest + [m])
    return Composition([m] + rest)


def qchain_transition_matrix(q_row: Sequence, n: int, kind: str = "composition"):
    """Exact transition probabilities: (states, {state: {next_state: prob}})."""
    if len(q_row) != n:
        raise ValueError("q_row must have length n")
    states = enumerate_compositions(n) if kind == "composition" else enumerate_partitions(n)
    key = Composition if kind == "composition" else Partition
    matrix: Dict[tuple, Dict[tuple, object]] = {}
    for c in states:
        row: Dict[tuple, object] = {}
        for m, qm in enumerate(q_row, start=1):
            if qm == 0:
                continue
            total = binom(n, m)
            for removed in product(*(range(min(p, m) + 1) for p in c)):
                if sum(removed) != m:
                    continue
                w = 1
                for p, r in zip(c, removed):
                    w *= binom(p, r)
                rest = [p - r for p, r in zip(c, removed) if p - r > 0]
                nxt = key([m] + rest)
                weight = w / total if isinstance(qm, float) else Fraction(w, total)
                row[nxt] = row.get(nxt, 0) + qm * weight
        matrix[c] = row
    return states, matrix


def apply_transition(law: Dict[tuple, object], matrix: Dict[tuple, Dict[tuple, object]]) -> Dict[tuple, object]:
    """Row-vector times matrix."""
    out: Dict[tuple, object] = {}
    for s, p in law.items():
        for t, w in matrix[s].items():
            out[t] = out.get(t, 0) + p * w
    return out


# ---------------------------------------------------------------- strings

def sample_bernoulli_string_dual_ewens(theta, n: int, rng) -> str:
    """Independent digits, eta_j = 1 w.p. theta/(j + theta - 1); eta_1 = 1."""
    t = float(theta)
    if t <= 0:
        raise ValueError("theta must be > 0")
    rng = make_rng(rng)
    j = np.arange(1, n + 1)
    bits = rng.random(n) < t / (j + t - 1)
    return "".join("1" if b else "0" for b in bits)


@lru_cache(maxsize=16)
def renewal_tail(alpha, m_max: int) -> np.ndarray:
    """P(step > m) = (1-alpha)_m / m! for m = 0..m_max."""
    a = float(alpha)
    m = np.arange(m_max + 1, dtype=float)
    return np.exp(gammaln(m + 1 - a) - gammaln(1 - a) - gammaln(m + 1))


def renewal_steps(alpha, n: int, rng) -> List[int]:
    """Steps of the renewal walk started at 1, drawn until the walk passes n."""
    rng = make_rng(rng)
    tail = renewal_tail(alpha, n)
    neg = -tail
    steps, pos = [], 1
    while pos <= n:
        u = rng.random()
        # smallest m >= 1 with tail(m) <= u; beyond n it does not matter where the step lands
        m = int(np.searchsorted(neg, -u, side="left"))
        m = max(m, 1) if m <= n else n + 1
        steps.append(m)
        pos += m
    return steps


def sample_renewal_string_alpha(alpha, n: int, rng) -> str:
    """Renewal times of T_0 = 1 with P(step = m) = (-1)^(m-1) C(alpha, m)."""
    a = float(alpha)
    if not 0 < a < 1:
        raise ValueError("alpha must lie in (0, 1)")
    bits = ["0"] * n
    pos = 1
    for m in renewal_steps(a, n, rng):
        if pos <= n:
            bits[pos - 1] = "1"
        pos += m
    return "".join(bits)


def sample_renewal_composition(alpha, n: int, rng) -> Composition:
    return binary_decode(sample_renewal_string_alpha(alpha, n, rng))


def string_to_composition(bits: str) -> Composition:
    return binary_decode(bits)


# ---------------------------------------------------------------- arrangements from initial ranks

def pw_initial_ranks(eta, k: int, rng) -> List[int]:
    """r_1 = 1; r_j = j w.p. eta/(eta+j-1), otherwise uniform on 1..j-1."""
    eta = float(eta)
    if eta < 0:
        raise ValueError("eta must be >= 0")
    rng = make_rng(rng)
    ranks = [1] if k >= 1 else []
    for j in range(2, k + 1):
        if math.isinf(eta) or rng.random() * (eta + j - 1) < eta:
            ranks.append(j)
        else:
            ranks.append(int(rng.integers(1, j)))
    return ranks


def decode_ranks(ranks: Sequence[int]) -> List[int]:
    """Place j at position r_j of the current row: (1,2,1,3) -> [3,1,4,2]."""
    row: List[int] = []
    for j, r in enumerate(ranks, start=1):
        if not 1 <= r <= j:
            raise ValueError(f"rank r_{j}={r} outside 1..{j}")
        row.insert(r - 1, j)
    return row


def pw_arrangement(labels: Sequence, eta, rng) -> list:
    order = decode_ranks(pw_initial_ranks(eta, len(labels), rng))
    return [labels[i - 1] for i in order]
