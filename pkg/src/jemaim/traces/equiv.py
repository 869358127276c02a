"""Trace-set equality and the first-divergence split fed to the back-translator."""
from __future__ import annotations

from dataclasses import dataclass

from ..aim.words import SYS_ID
from .actions import FuelExceeded, is_input
from .engine import AdversaryDomain, enumerate_traces


class InterfaceMismatch(Exception):
    pass


class NotComparable(Exception):
    """The traces differ first at a ?-action: an adversary mismatch, not a component one."""


def same_interface(img1, img2) -> bool:
    em1 = {k for k, a in img1.table.em.items() if a.mid != SYS_ID}
    em2 = {k for k, a in img2.table.em.items() if a.mid != SYS_ID}
    return em1 == em2 and set(img1.table.eo) == set(img2.table.eo)


@dataclass
class Inequivalent:
    t1: tuple  # a trace of the first component
    t2: tuple  # the second component's trace sharing the longest odd prefix

    equivalent = False


@dataclass
class Equivalent:
    traces: int

    equivalent = True


def trace_equiv(img1, img2, depth=4, domain: AdversaryDomain | None = None, seed: int = 0, segment_fuel: int = 100_000):
    """Set equality of canonical bounded trace sets; a witness pair otherwise."""
    if not same_interface(img1, img2):
        raise InterfaceMismatch("components expose different method or object bindings")
    t1s = enumerate_traces(img1, depth, domain, seed, segment_fuel)
    t2s = enumerate_traces(img2, depth, domain, seed, segment_fuel)
    if t1s == t2s:
        return Equivalent(len(t1s))
    only1 = sorted(t1s - t2s, key=_trace_key)
    only2 = sorted(t2s - t1s, key=_trace_key)
    if only1:
        t1 = only1[0]
        t2 = _best_mate(t1, t2s)
        return Inequivalent(t1, t2)
    t2 = only2[0]
    t1 = _best_mate(t2, t1s)
    return Inequivalent(t1, t2)


def _trace_key(t):
    # prefer divergences the back-translator can replay: a tick ending stems
    # from a triggered check (or a null dereference), not from observable output
    from .actions import Tick

    ticked = 1 if t and isinstance(t[-1], Tick) else 0
    return (ticked, len(t), tuple(a.render() for a in t))


def _common_len(a, b) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def _best_mate(t, pool) -> tuple:
    """The pool trace sharing the longest prefix with t, then shortest, then lexicographic."""
    best, best_key = (), (-1, 0, "")
    for cand in pool:
        c = _common_len(t, cand)
        key = (c, -len(cand), "")
        if (key[0], key[1]) > (best_key[0], best_key[1]):
            best, best_key = cand, key
    # trim the mate to the divergence pair: shared prefix plus its next action
    c = _common_len(t, best)
    return best[: c + 1]


def first_divergence(t1, t2):
    """Split two traces into (common prefix, differing action 1, differing action 2, index).

    The prefix is the longest shared odd-length prefix; the differing actions
    are !-actions (an exhausted trace contributes the absent action, modelled
    by the segment-fuel pseudo-action)."""
    i = _common_len(t1, t2)
    if i == len(t1) and i == len(t2):
        raise ValueError("traces are identical")
    a1 = t1[i] if i < len(t1) else FuelExceeded()
    a2 = t2[i] if i < len(t2) else FuelExceeded()
    if i % 2 == 0:
        # positions alternate ?-!; an even index is an environment move
        raise NotComparable(f"traces diverge at a ?-action (index {i})")
    if is_input(a1) or is_input(a2):
        raise NotComparable("divergence actions must be component moves")
    return t1[:i], a1, a2, i
