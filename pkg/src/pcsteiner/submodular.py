"""Value-oracle machinery for the growth phase.

The slack of a demand set ``D`` after growing by ``eta`` is

    g(D) = pi(D) - y(D) - eta * rate(D)

which is submodular because the subtracted part is modular.  Additive and
capped penalties get closed-form minimizers; anything else is enumerated
exactly over the ground set (at most 20 demands).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import AdditivePenalty, CappedPenalty, CapacityError, DomainError, PenaltyFn

ENUMERATION_LIMIT = 20

ZERO = Fraction(0)


@dataclass(frozen=True)
class SlackFn:
    base: PenaltyFn
    charge: tuple[Fraction, ...]
    rate: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.charge) != self.base.size or len(self.rate) != self.base.size:
            raise DomainError("charge/rate vectors must match the ground set")

    def weight(self, eta: Fraction = ZERO) -> list[Fraction]:
        return [y + eta * r for y, r in zip(self.charge, self.rate)]

    def __call__(self, D: Iterable[int], eta: Fraction = ZERO) -> Fraction:
        D = frozenset(D)
        return self.base(D) - sum((self.charge[d] + eta * self.rate[d] for d in D), ZERO)


@dataclass(frozen=True)
class EtaResult:
    eta: Fraction | None
    kind: str  # "edge-tight" | "set-tight" | "unbounded"
    binding: int | frozenset | None = None


def _masks(k: int):
    """Gray-code walk over all subsets: yields (mask, flipped index or -1)."""
    yield 0, -1
    prev = 0
    for i in range(1, 1 << k):
        g = i ^ (i >> 1)
        yield g, (g ^ prev).bit_length() - 1
        prev = g


def _check_size(k: int):
    if k > ENUMERATION_LIMIT:
        raise CapacityError(f"enumeration backend limited to {ENUMERATION_LIMIT} demands, got {k}")


def _enumerate_min(g: SlackFn, eta: Fraction, forced: frozenset[int]):
    k = g.base.size
    _check_size(k)
    w = g.weight(eta)
    fmask = sum(1 << d for d in forced)
    best = None
    for mask, _ in _masks(k):
        if mask & fmask != fmask:
            continue
        D = frozenset(i for i in range(k) if mask >> i & 1)
        val = g.base._value(D) - sum((w[i] for i in D), ZERO)
        if best is None or val < best[1] or (val == best[1] and len(D) < len(best[0])):
            best = (D, val)
    return best


def minimize_submodular(g: SlackFn, eta: Fraction = ZERO, forced_in: Iterable[int] = (),
                        backend: str = "auto") -> tuple[frozenset[int], Fraction]:
    """Return a minimizer of ``g`` over sets containing ``forced_in`` and its value."""
    forced = frozenset(forced_in)
    eta = Fraction(eta)
    base = g.base
    if backend == "auto":
        if isinstance(base, AdditivePenalty):
            backend = "additive"
        elif isinstance(base, CappedPenalty) and eta >= 0 and min(g.rate, default=0) >= 0:
            backend = "capped"
        else:
            backend = "enumerate"
    if backend == "enumerate":
        return _enumerate_min(g, eta, forced)
    w = g.weight(eta)
    if backend == "additive":
        D = set(forced)
        for d in range(base.size):
            if d not in forced and base.p[d] - w[d] < 0:
                D.add(d)
        D = frozenset(D)
        return D, sum((base.p[d] - w[d] for d in D), ZERO)
    if backend == "capped":
        # min over D of min(sum_D (p - w), cap - sum_D w); with w >= 0 the
        # second term is smallest on the full set.
        if any(x < 0 for x in w):
            raise DomainError("capped fast path needs nonnegative weights")
        D1 = set(forced)
        for d in range(base.size):
            if d not in forced and base.p[d] - w[d] < 0:
                D1.add(d)
        D1 = frozenset(D1)
        v1 = g(D1, eta)
        full = frozenset(range(base.size))
        v2 = g(full, eta)
        return (D1, v1) if v1 <= v2 else (full, v2)
    raise DomainError(f"unknown backend {backend!r}")


def _ratio(num: Fraction, den: Fraction) -> Fraction:
    return num / den


def eta_set(pi: PenaltyFn, charge: Sequence[Fraction], rate: Sequence[Fraction]):
    """Largest ``eta`` keeping every set constraint feasible, with a binding set.

    Returns ``(None, None)`` when no set has a positive rate.
    """
    k = pi.size
    if isinstance(pi, (AdditivePenalty, CappedPenalty)):
        best = (None, None)
        for d in range(k):
            if rate[d] > 0:
                r = _ratio(pi.p[d] - charge[d], rate[d])
                if best[0] is None or r < best[0]:
                    best = (r, frozenset([d]))
        if isinstance(pi, CappedPenalty):
            total_rate = sum(rate, ZERO)
            if total_rate > 0:
                r = _ratio(pi.cap - sum(charge, ZERO), total_rate)
                if best[0] is None or r < best[0]:
                    best = (r, frozenset(range(k)))
        return best
    _check_size(k)
    best = (None, None)
    ysum = ZERO
    rsum = ZERO
    mask = 0
    for mask, flip in _masks(k):
        if flip >= 0:
            if mask >> flip & 1:
                ysum += charge[flip]
                rsum += rate[flip]
            else:
                ysum -= charge[flip]
                rsum -= rate[flip]
        if rsum <= 0:
            continue
        D = frozenset(i for i in range(k) if mask >> i & 1)
        r = _ratio(pi._value(D) - ysum, rsum)
        if best[0] is None or r < best[0]:
            best = (r, D)
    return best


def compute_eta(pi: PenaltyFn, charge: Sequence[Fraction], rate: Sequence[Fraction],
                edges: Iterable[tuple[int, Fraction, int]]) -> EtaResult:
    """Step size of one growth event.

    ``edges`` lists inter-cluster edges as ``(edge_id, slack, rate)`` where the
    rate is the number of active clusters at the edge's endpoints.  ``rate`` is
    the per-demand growth rate of ``y_d``.  Ties go to edges.
    """
    edges = list(edges)
    if not any(r > 0 for r in rate) and not any(er > 0 for _, _, er in edges):
        raise DomainError("no active cluster")
    best_edge = None
    for eid, slack, er in edges:
        if er <= 0:
            continue
        val = _ratio(slack, Fraction(er))
        if best_edge is None or val < best_edge[0] or (val == best_edge[0] and eid < best_edge[1]):
            best_edge = (val, eid)
    set_val, set_binding = eta_set(pi, charge, rate)
    if best_edge is None and set_val is None:
        return EtaResult(None, "unbounded")
    if set_val is None or (best_edge is not None and best_edge[0] <= set_val):
        return EtaResult(max(best_edge[0], ZERO), "edge-tight", best_edge[1])
    return EtaResult(max(set_val, ZERO), "set-tight", set_binding)


def dead_set_update(pi: PenaltyFn, charge: Sequence[Fraction],
                    live: Iterable[int]) -> frozenset[int]:
    """Live demands contained in some tight set (``y(D) = pi(D)``)."""
    live = frozenset(live)
    g = SlackFn(pi, tuple(charge), (ZERO,) * pi.size)
    if isinstance(pi, (AdditivePenalty, CappedPenalty)):
        return frozenset(d for d in live if minimize_submodular(g, ZERO, {d})[1] == 0)
    _check_size(pi.size)
    # One pass: the union of all tight sets.
    dead = 0
    k = pi.size
    ysum = ZERO
    for mask, flip in _masks(k):
        if flip >= 0:
            ysum += charge[flip] if mask >> flip & 1 else -charge[flip]
        if mask & ~dead == 0:
            continue
        D = frozenset(i for i in range(k) if mask >> i & 1)
        if pi._value(D) - ysum == 0:
            dead |= mask
    return frozenset(d for d in live if dead >> d & 1)
