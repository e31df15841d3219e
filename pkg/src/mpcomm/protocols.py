"""Broadcast-protocol engine and the bundled protocols.

A :class:`Protocol` is a fixed schedule of :class:`Step` s.  At each step one
party sees a :class:`PartyView` (its own input, the transcript so far, and
its own share of any pre-shared quantum resource) and returns a bit string
which the engine broadcasts.  After the schedule every party applies the
output rule to its final view.  The engine is the only thing that writes
the transcript, so total cost is measured, never declared.

Party numbering is 1-based.  For the three-party problem Alice is party 1,
Bob party 2 and Carol party 3; the one-round schedule is Bob, Carol, Alice.
Integers are encoded big-endian.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import qsim
from .core import FInput, TripleVector, U, enumerate_valid_triple_vectors, f_big, g_m

_BITS = frozenset("01")


class ProtocolFailure(RuntimeError):
    """A protocol misbehaved: malformed message, disagreement or wrong answer."""


def to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def from_bits(bits: str) -> int:
    return int(bits, 2) if bits else 0


def ceil_log2(x: int) -> int:
    """Smallest ``c >= 0`` with ``2**c >= x``, for positive integers."""
    if x < 1:
        raise ValueError(f"ceil_log2 needs a positive integer, got {x}")
    return (x - 1).bit_length()


# ---------------------------------------------------------------------------
# engine types


@dataclass(frozen=True)
class BroadcastEvent:
    party: int
    bits: str

    def __post_init__(self):
        if not self.bits or not set(self.bits) <= _BITS:
            raise ProtocolFailure(f"party {self.party} emitted malformed payload {self.bits!r}")

    @property
    def cost(self) -> int:
        return len(self.bits)


@dataclass
class Transcript:
    events: list[BroadcastEvent] = field(default_factory=list)

    def append(self, event: BroadcastEvent) -> None:
        self.events.append(event)

    @property
    def total_bits(self) -> int:
        return sum(e.cost for e in self.events)

    def from_party(self, party: int) -> list[str]:
        return [e.bits for e in self.events if e.party == party]

    def to_json(self) -> list[dict]:
        return [{"party": e.party, "bits": e.bits} for e in self.events]


@dataclass(frozen=True)
class PartyView:
    """Everything a party may legally look at when it acts."""

    party: int
    own_input: Any
    transcript: tuple[BroadcastEvent, ...]
    resource: Any = None

    def said(self, party: int) -> list[str]:
        return [e.bits for e in self.transcript if e.party == party]


@dataclass(frozen=True)
class Step:
    party: int
    rule: Callable[[PartyView], str]


@dataclass(frozen=True)
class Protocol:
    name: str
    parties: int
    steps: tuple[Step, ...]
    output: Callable[[PartyView], int]
    split_input: Callable[[Any], tuple]
    target: Callable[[Any], int]
    cost: int
    params: dict = field(default_factory=dict)
    # (per-party inputs, seed) -> (per-party resource, seeds used)
    resources: Optional[Callable[[tuple, Any], tuple[tuple, list]]] = None

    @property
    def quantum(self) -> bool:
        return self.resources is not None


@dataclass
class ProtocolRun:
    protocol: str
    params: dict
    input: Any
    seed: Any
    transcript: Transcript
    outputs: tuple[int, ...]
    resource_seeds: list = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return self.transcript.total_bits

    @property
    def output(self) -> int:
        return self.outputs[0]

    def to_json(self) -> dict:
        inp = self.input
        out = {"protocol": self.protocol, **self.params}
        out["input"] = list(inp.values) if isinstance(inp, FInput) else inp.to_json()
        out.update(
            seed=self.seed,
            transcript=self.transcript.to_json(),
            outputs=list(self.outputs),
            total_bits=self.total_bits,
        )
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def run(protocol: Protocol, inp, seed=0, check: bool = True) -> ProtocolRun:
    """Execute ``protocol`` on ``inp``.

    With ``check`` set, the engine raises :class:`ProtocolFailure` if the
    parties disagree or, on a valid input, if their answer differs from the
    target function.  An empty payload means the party stays silent.
    """
    own = protocol.split_input(inp)
    if len(own) != protocol.parties:
        raise ProtocolFailure(f"{protocol.name}: input splits into {len(own)} parts, expected {protocol.parties}")
    if protocol.resources is not None:
        shares, seeds = protocol.resources(own, seed)
    else:
        shares, seeds = (None,) * protocol.parties, []

    transcript = Transcript()
    for step in protocol.steps:
        view = PartyView(step.party, own[step.party - 1], tuple(transcript.events), shares[step.party - 1])
        payload = step.rule(view)
        if not isinstance(payload, str):
            raise ProtocolFailure(f"{protocol.name}: party {step.party} returned {type(payload).__name__}, not str")
        if payload:
            transcript.append(BroadcastEvent(step.party, payload))

    final = tuple(transcript.events)
    outputs = tuple(
        int(protocol.output(PartyView(p, own[p - 1], final, shares[p - 1]))) for p in range(1, protocol.parties + 1)
    )
    result = ProtocolRun(protocol.name, dict(protocol.params), inp, seed, transcript, outputs, seeds)
    if check:
        if len(set(outputs)) != 1:
            raise ProtocolFailure(f"{protocol.name}: parties disagree on {inp}: {outputs}")
        if inp.is_valid and outputs[0] != protocol.target(inp):
            raise ProtocolFailure(f"{protocol.name}: answered {outputs[0]} on {inp}, target is {protocol.target(inp)}")
    return result


# ---------------------------------------------------------------------------
# k-party protocols for F


def _split_f(inp: FInput) -> tuple:
    return inp.values


def _last_bit(view: PartyView) -> int:
    return int(view.transcript[-1].bits[-1])


def entangled_F(k: int, n: int) -> Protocol:
    """One measured cat-state qubit per party; everyone outputs the parity."""
    if k < 2 or n < 1:
        raise ValueError(f"need k >= 2 and n >= 1, got k={k}, n={n}")

    def resources(own: tuple, seed):
        reg = qsim.make_cat_state(k, n)
        for i, x in enumerate(own):
            # party i+1 touches only its own qubit with its own input
            qsim.apply_phase(reg, i, x)
        qsim.apply_hadamard_all(reg)
        rec = qsim.measure(reg, seed)
        return rec.bits, [seed]

    def broadcast(view: PartyView) -> str:
        return str(view.resource)

    def output(view: PartyView) -> int:
        return sum(int(e.bits) for e in view.transcript) % 2

    steps = tuple(Step(p, broadcast) for p in range(1, k + 1))
    return Protocol("entangled-f", k, steps, output, _split_f, f_big, cost=k,
                    params={"k": k, "n": n}, resources=resources)


def classical_naive_F(k: int, n: int) -> Protocol:
    """Parties 1..k-1 broadcast their inputs, party k announces F."""
    if k < 2 or n < 1:
        raise ValueError(f"need k >= 2 and n >= 1, got k={k}, n={n}")

    def send_input(view: PartyView) -> str:
        return to_bits(view.own_input, n)

    def answer(view: PartyView) -> str:
        total = view.own_input + sum(from_bits(e.bits) for e in view.transcript)
        return str((total % 2**n) >> (n - 1))

    steps = tuple(Step(p, send_input) for p in range(1, k)) + (Step(k, answer),)
    return Protocol("naive-f", k, steps, _last_bit, _split_f, f_big, cost=(k - 1) * n + 1,
                    params={"k": k, "n": n})


def highbits_width(k: int) -> int:
    """Number of leading bits each of the first k-1 parties must send."""
    return 1 + ceil_log2(k - 1)


def classical_highbits_F(k: int, n: int) -> Protocol:
    """Parties 1..k-1 send only their top ``d`` bits.

    Party k sees the sum up to a dropped remainder ``delta`` in
    ``[0, 2**(n-1))``; since valid sums are multiples of ``2**(n-1)`` it
    rounds up to the next such multiple and reads off F.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    d = highbits_width(k)
    if n < d:
        raise ValueError(f"highbits protocol needs n >= d = {d} for k = {k}, got n = {n}")
    shift = n - d
    half = 2 ** (n - 1)

    def send_top(view: PartyView) -> str:
        return to_bits(view.own_input >> shift, d)

    def answer(view: PartyView) -> str:
        partial = view.own_input + sum(from_bits(e.bits) << shift for e in view.transcript)
        total = -(-partial // half) * half
        return str((total % 2**n) >> (n - 1))

    steps = tuple(Step(p, send_top) for p in range(1, k)) + (Step(k, answer),)
    return Protocol("highbits-f", k, steps, _last_bit, _split_f, f_big, cost=(k - 1) * d + 1,
                    params={"k": k, "n": n, "d": d})


# ---------------------------------------------------------------------------
# one-round three-party protocols for G_m

ALICE, BOB, CAROL = 1, 2, 3


def _split_g(v: TripleVector) -> tuple:
    return (v.xs, v.ys, v.zs)


def _alice_answer(view: PartyView) -> int:
    if view.party == ALICE:
        return _last_bit(view)
    return int(view.said(ALICE)[-1])


def classical_oneround_Gm(m: int) -> Protocol:
    """Bob sends all 2m bits, Carol her m high bits, Alice announces G_m."""
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")

    def bob(view: PartyView) -> str:
        ys = view.own_input
        return "".join(str(y >> 1) for y in ys) + "".join(str(y & 1) for y in ys)

    def carol(view: PartyView) -> str:
        return "".join(str(z >> 1) for z in view.own_input)

    def alice(view: PartyView) -> str:
        (b_msg,), (c_msg,) = view.said(BOB), view.said(CAROL)
        y_high, y_low = b_msg[:m], b_msg[m:]
        ok = True
        for i, x in enumerate(view.own_input):
            y = 2 * int(y_high[i]) + int(y_low[i])
            # the promise pins Carol's low bit: x + y + z is even
            z = 2 * int(c_msg[i]) + (x + y) % 2
            ok &= ((x + y + z) % 4) // 2 == 1
        return str(int(ok))

    steps = (Step(BOB, bob), Step(CAROL, carol), Step(ALICE, alice))
    return Protocol("oneround-gm", 3, steps, _alice_answer, _split_g, g_m, cost=3 * m + 1, params={"m": m})


def entangled_oneround_Gm(m: int) -> Protocol:
    """One three-qubit cat state per instance; Bob and Carol send their m outcomes."""
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")

    def resources(own: tuple, seed):
        shares = ([], [], [])
        seeds = []
        for i in range(m):
            reg = qsim.make_cat_state(3, 2)
            for party in range(3):
                qsim.apply_phase(reg, party, own[party][i])
            qsim.apply_hadamard_all(reg)
            instance_seed = [seed, i]
            rec = qsim.measure(reg, instance_seed)
            seeds.append(instance_seed)
            for party in range(3):
                shares[party].append(rec.bits[party])
        return tuple(tuple(s) for s in shares), seeds

    def send_outcomes(view: PartyView) -> str:
        return "".join(map(str, view.resource))

    def alice(view: PartyView) -> str:
        (b_msg,), (c_msg,) = view.said(BOB), view.said(CAROL)
        ok = all((a + int(b) + int(c)) % 2 == 1 for a, b, c in zip(view.resource, b_msg, c_msg))
        return str(int(ok))

    steps = (Step(BOB, send_outcomes), Step(CAROL, send_outcomes), Step(ALICE, alice))
    return Protocol("entangled-gm", 3, steps, _alice_answer, _split_g, g_m, cost=2 * m + 1,
                    params={"m": m}, resources=resources)


# ---------------------------------------------------------------------------
# one-round protocols as data (for the exhaustive search)


@dataclass(frozen=True)
class OneRoundProtocolTable:
    """A one-round protocol for G_m given by explicit message tables.

    ``sigma_b`` maps Bob's U^m vector to an ``s_b``-bit string, ``sigma_c``
    maps (Carol's vector, Bob's message) to an ``s_c``-bit string, and
    ``answer`` maps Alice's view (x, Bob's message, Carol's message) to a
    bit.  Views absent from ``answer`` are treated as answering 0.
    """

    m: int
    s_b: int
    s_c: int
    sigma_b: dict
    sigma_c: dict
    answer: dict

    @property
    def cost(self) -> int:
        return self.s_b + self.s_c + 1

    def messages(self, ys, zs) -> tuple[str, str]:
        b = self.sigma_b[tuple(ys)]
        return b, self.sigma_c[(tuple(zs), b)]

    def alice(self, xs, b: str, c: str) -> int:
        return self.answer.get((tuple(xs), b, c), 0)

    def to_json(self) -> dict:
        key = lambda v: "".join(map(str, v))
        return {
            "m": self.m,
            "s_b": self.s_b,
            "s_c": self.s_c,
            "sigma_b": {key(y): b for y, b in sorted(self.sigma_b.items())},
            "sigma_c": {f"{key(z)}|{b}": c for (z, b), c in sorted(self.sigma_c.items())},
        }

    def as_protocol(self) -> Protocol:
        def bob(view: PartyView) -> str:
            return self.sigma_b[tuple(view.own_input)]

        def carol(view: PartyView) -> str:
            said = view.said(BOB)
            return self.sigma_c[(tuple(view.own_input), said[0] if said else "")]

        def alice(view: PartyView) -> str:
            b, c = view.said(BOB), view.said(CAROL)
            return str(self.alice(view.own_input, b[0] if b else "", c[0] if c else ""))

        steps = (Step(BOB, bob), Step(CAROL, carol), Step(ALICE, alice))
        return Protocol("table-gm", 3, steps, _alice_answer, _split_g, g_m, cost=self.cost,
                        params={"m": self.m})


def reference_oneround_table(m: int) -> OneRoundProtocolTable:
    """The straightforward 3m+1 protocol written out as tables."""
    vecs = list(itertools.product(U, repeat=m))
    sigma_b = {y: "".join(str(v >> 1) for v in y) + "".join(str(v & 1) for v in y) for y in vecs}
    sigma_c = {(z, b): "".join(str(v >> 1) for v in z) for z in vecs for b in sigma_b.values()}
    answer = {}
    for v in enumerate_valid_triple_vectors(m):
        b = sigma_b[v.ys]
        answer[(v.xs, b, sigma_c[(v.zs, b)])] = g_m(v)
    return OneRoundProtocolTable(m, 2 * m, m, sigma_b, sigma_c, answer)


BUNDLED = {
    "entangled-f": entangled_F,
    "naive-f": classical_naive_F,
    "highbits-f": classical_highbits_F,
    "oneround-gm": classical_oneround_Gm,
    "entangled-gm": entangled_oneround_Gm,
}


def closed_form_cost(name: str, k: int = 0, n: int = 0, m: int = 0) -> int:
    if name == "entangled-f":
        return k
    if name == "naive-f":
        return (k - 1) * n + 1
    if name == "highbits-f":
        return (k - 1) * highbits_width(k) + 1
    if name == "oneround-gm":
        return 3 * m + 1
    if name == "entangled-gm":
        return 2 * m + 1
    raise KeyError(name)
