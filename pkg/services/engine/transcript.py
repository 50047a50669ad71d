"""
Run Transcript
The sequence of (e_k, xi_k, Omega_k) with chat, resolution and settlement,
plus its line-delimited record format
"""

import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from services.chat.disclosure import ChatMessage, Verdict
from services.errors import InvalidSpace, ParseError
from services.market.ledger import TradeRecord
from services.market.resolution import ResolutionRecord
from services.world.space import Event, Prob, SampleSpace, format_prob, parse_prob
from services.world.streams import Stream, stream_seed


@dataclass(frozen=True)
class Round:
    """One stabilization point: e_k, xi_k and Omega_k"""
    k: int
    entered: FrozenSet[str]
    entrant: Optional[str]
    xi: Prob
    omega: Event
    messages: Tuple[ChatMessage, ...] = ()
    trajectory: Tuple[float, ...] = ()


@dataclass
class Transcript:
    scenario_name: str
    fingerprint: str
    seed: int
    space: SampleSpace
    rounds: List[Round] = field(default_factory=list)
    resolution: Optional[ResolutionRecord] = None
    balances: Dict[str, float] = field(default_factory=dict)
    profits: Dict[str, float] = field(default_factory=dict)
    rewards: Dict[str, Decimal] = field(default_factory=dict)
    mm_pnl: Optional[float] = None
    degenerate: bool = False
    ticked: bool = False
    trades: List[TradeRecord] = field(default_factory=list)

    @property
    def k_infinity(self) -> int:
        return len(self.rounds)

    @property
    def final(self) -> Round:
        return self.rounds[-1]

    @property
    def prices(self) -> List[Prob]:
        return [r.xi for r in self.rounds]

    @property
    def chat(self) -> List[ChatMessage]:
        return [m for r in self.rounds for m in r.messages]

    @property
    def entrants(self) -> List[str]:
        return [r.entrant for r in self.rounds if r.entrant is not None]

    def price_trajectory(self) -> List[float]:
        """Every recorded book price in order, tick prices included"""
        out: List[float] = []
        for r in self.rounds:
            out.extend(r.trajectory or (float(r.xi),))
        return out

    @property
    def trajectory_length(self) -> float:
        """Total absolute movement of the recorded book price"""
        path = self.price_trajectory()
        return float(sum(abs(b - a) for a, b in zip(path, path[1:])))

    def to_records(self) -> List[Dict[str, Any]]:
        records = [_round_record(self.space, r, self.ticked) for r in self.rounds]
        terminal: Dict[str, Any] = {"k_infinity": self.k_infinity}
        if self.resolution is not None:
            terminal["final_price"] = format_prob(self.resolution.final_price)
            terminal["theta"] = self.resolution.theta
        terminal["seed"] = self.seed
        if self.degenerate:
            terminal["degenerate"] = True
        records.append(terminal)
        return records

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in self.to_records())


def _round_record(space: SampleSpace, r: Round, ticked: bool) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "k": r.k,
        "entered": r.entrant,
        "xi": format_prob(r.xi),
        "omega": space.labels(r.omega),
        "chat": [
            {
                "sender": m.sender,
                "round": m.round,
                "claim": space.labels(m.claimed_info),
                "verdict": m.verdict.value if m.verdict else None,
            }
            for m in r.messages
        ],
    }
    if ticked:
        record["trajectory"] = [format_prob(p) for p in r.trajectory]
    return record


def parse_transcript(
    text: str,
    space: SampleSpace,
    initial_entered: FrozenSet[str],
    scenario_name: str = "",
    fingerprint: str = "",
) -> Transcript:
    """Rebuild a transcript from its records; e_1 comes from the scenario"""
    rational = space.is_rational
    rounds: List[Round] = []
    terminal: Optional[Dict[str, Any]] = None
    entered = frozenset(initial_entered)

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"line {lineno}: {e.msg}", {"line": lineno, "column": e.colno})
        try:
            if "k_infinity" in record:
                terminal = record
                continue
            entrant = record["entered"]
            if entrant is not None:
                entered = entered | {entrant}
            rounds.append(Round(
                k=int(record["k"]),
                entered=entered,
                entrant=entrant,
                xi=parse_prob(record["xi"], rational),
                omega=space.event(record["omega"]),
                messages=tuple(
                    ChatMessage(
                        sender=m["sender"],
                        claimed_info=space.event(m["claim"]),
                        round=int(m["round"]),
                        verdict=Verdict(m["verdict"]) if m["verdict"] else None,
                    )
                    for m in record["chat"]
                ),
                trajectory=tuple(float(p) for p in record.get("trajectory", ())),
            ))
        except (KeyError, TypeError, ValueError, InvalidSpace) as e:
            raise ParseError(f"line {lineno}: malformed round record ({e})", {"line": lineno})

    if terminal is None:
        raise ParseError("transcript has no terminal record")
    if terminal["k_infinity"] != len(rounds):
        raise ParseError(
            "terminal k_infinity does not match the number of rounds",
            {"k_infinity": terminal["k_infinity"], "rounds": len(rounds)},
        )

    resolution = None
    if "theta" in terminal:
        resolution = ResolutionRecord(
            final_price=parse_prob(terminal["final_price"], rational),
            theta=int(terminal["theta"]),
            rng_seed=stream_seed(int(terminal["seed"]), Stream.RESOLUTION),
        )
    return Transcript(
        scenario_name=scenario_name,
        fingerprint=fingerprint,
        seed=int(terminal["seed"]),
        space=space,
        rounds=rounds,
        resolution=resolution,
        degenerate=bool(terminal.get("degenerate", False)),
        ticked=any(r.trajectory for r in rounds),
    )
