"""Trace actions: decorated calls and returns, termination ticks, serialization.

?-decorated actions are performed by the environment, !-decorated ones by the
component. Canonicalization renames nonces to N0, N1, ... — statically
exported object masks first (in table order, so two components with the same
interface canonicalize identically), then by first occurrence in the trace.
Linking symbols print as $name and are already stable across components.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..aim.words import Address, Nonce, Symbol, Word


@dataclass(frozen=True)
class CallIn:
    """Call? — the environment enters the component."""

    addr: tuple
    regs: tuple

    decoration = "?"

    def render(self):
        return f"call? {_addr(self.addr)} [{','.join(_word(w) for w in self.regs)}]"


@dataclass(frozen=True)
class CallOut:
    """Callback! — the component calls a required method of the environment."""

    addr: tuple
    regs: tuple

    decoration = "!"

    def render(self):
        return f"call! {_addr(self.addr)} [{','.join(_word(w) for w in self.regs)}]"


@dataclass(frozen=True)
class ReturnIn:
    """Returnback? — the environment returns from a callback."""

    addr: tuple
    value: Word
    caller: Word

    decoration = "?"

    def render(self):
        return f"ret? {_addr(self.addr)} {_word(self.value)} id={_word(self.caller)}"


@dataclass(frozen=True)
class ReturnOut:
    """Return! — the component returns to the environment."""

    addr: tuple
    value: Word
    mid: Word

    decoration = "!"

    def render(self):
        return f"ret! {_addr(self.addr)} {_word(self.value)} id={_word(self.mid)}"


@dataclass(frozen=True)
class Tick:
    decoration = "!"

    def render(self):
        return "tick"


@dataclass(frozen=True)
class FuelExceeded:
    """Pseudo-action: the component did not answer within the segment budget."""

    decoration = "!"

    def render(self):
        return "segment-fuel-exceeded"


Action = object
Trace = tuple


def is_input(a: Action) -> bool:
    return a.decoration == "?"


def _addr(addr) -> str:
    a, b = addr
    return f"({_word(a)},{_word(b)})"


def _word(w) -> str:
    if isinstance(w, Symbol):
        return f"${w.name}"
    if isinstance(w, Nonce):
        return f"#{w.stream}:{w.seq}"
    return str(w)


class Canonicalizer:
    """Order-preserving renaming of nonces to N<k> strings."""

    def __init__(self, seed_masks: list[Nonce] = ()):  # masks first, table order
        self.names: dict[Nonce, str] = {}
        for n in seed_masks:
            self.name(n)

    def name(self, n: Nonce) -> str:
        if n not in self.names:
            self.names[n] = f"N{len(self.names)}"
        return self.names[n]

    def word(self, w):
        if isinstance(w, Nonce):
            return self.name(w)
        if isinstance(w, Symbol):
            return f"${w.name}"
        return w

    def action(self, a: Action) -> Action:
        if isinstance(a, CallIn):
            return CallIn(tuple(self.word(x) for x in a.addr), tuple(self.word(w) for w in a.regs))
        if isinstance(a, CallOut):
            return CallOut(tuple(self.word(x) for x in a.addr), tuple(self.word(w) for w in a.regs))
        if isinstance(a, ReturnIn):
            return ReturnIn(tuple(self.word(x) for x in a.addr), self.word(a.value), self.word(a.caller))
        if isinstance(a, ReturnOut):
            return ReturnOut(tuple(self.word(x) for x in a.addr), self.word(a.value), self.word(a.mid))
        return a


def canonicalize(trace, seed_masks=()) -> Trace:
    c = Canonicalizer(seed_masks)
    return tuple(c.action(a) for a in trace)


def render_trace(trace) -> str:
    return "\n".join(a.render() for a in trace) + "\n"


def parse_trace(text: str) -> Trace:
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        out.append(_parse_action(line))
    return tuple(out)


def _parse_action(line: str):
    kind, _, rest = line.partition(" ")
    if kind == "tick":
        return Tick()
    if kind == "segment-fuel-exceeded":
        return FuelExceeded()
    addr_s, _, rest = rest.partition(" ")
    addr = tuple(_parse_word(x) for x in addr_s.strip("()").split(","))
    if kind in ("call?", "call!"):
        regs = tuple(_parse_word(x) for x in rest.strip("[]").split(",") if x)
        return (CallIn if kind == "call?" else CallOut)(addr, regs)
    if kind in ("ret?", "ret!"):
        value_s, _, id_s = rest.partition(" id=")
        value, ident = _parse_word(value_s.strip()), _parse_word(id_s.strip())
        if kind == "ret?":
            return ReturnIn(addr, value, ident)
        return ReturnOut(addr, value, ident)
    raise ValueError(f"unparseable action line: {line!r}")


def _parse_word(s: str):
    if s.startswith("$"):
        return f"${s[1:]}"
    if s.startswith("N"):
        return s
    if s.startswith("#"):
        stream, _, seq = s[1:].rpartition(":")
        return Nonce(stream, int(seq))
    return int(s)
