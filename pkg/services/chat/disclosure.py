"""
Disclosure Channel
Public chat with verifiable disclosures and the public-state update
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import structlog

from services.errors import NotVerified
from services.world.space import Event, Partition, SampleSpace

logger = structlog.get_logger(__name__)


class Verdict(str, Enum):
    VERIFIED = "VERIFIED"
    REJECTED = "REJECTED"


@dataclass(frozen=True)
class ChatMessage:
    sender: str
    claimed_info: Event
    round: int
    verdict: Optional[Verdict] = None

    def judged(self, verdict: Verdict) -> "ChatMessage":
        return replace(self, verdict=verdict)


@dataclass(frozen=True)
class PublicState:
    """Ω_k, the round index and the applied (verified) disclosures"""
    omega: Event
    round: int = 1
    history: Tuple[ChatMessage, ...] = ()

    @classmethod
    def initial(cls, space: SampleSpace) -> "PublicState":
        return cls(omega=space.full)


def verify_disclosure(space: SampleSpace, sender_partition: Partition, msg: ChatMessage) -> Verdict:
    # the referee knows the true atom; only a true cell of the sender's partition passes
    if msg.claimed_info in sender_partition and space.true_index in msg.claimed_info:
        return Verdict.VERIFIED
    logger.warning("disclosure_rejected", sender=msg.sender, round=msg.round,
                   claim=space.labels(msg.claimed_info))
    return Verdict.REJECTED


def apply_disclosure(public: PublicState, msg: ChatMessage) -> PublicState:
    if msg.verdict is not Verdict.VERIFIED:
        raise NotVerified(f"message from {msg.sender} was not verified", {"verdict": msg.verdict})
    return PublicState(
        omega=public.omega & msg.claimed_info,
        round=public.round + 1,
        history=public.history + (msg,),
    )


def apply_silence(public: PublicState) -> PublicState:
    return replace(public, round=public.round + 1)
