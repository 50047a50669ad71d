"""
Tests for verified disclosures, the public-state update and multi-unit ordering
"""

from fractions import Fraction

import pytest

from services.chat.disclosure import (
    ChatMessage,
    PublicState,
    Verdict,
    apply_disclosure,
    apply_silence,
    verify_disclosure,
)
from services.chat.units import split_units, trajectory_length
from services.errors import NotVerified, UnitsInconsistent
from services.world.space import SampleSpace


def test_true_cell_is_verified(exm_space, exm_partitions):
    s = exm_space
    msg = ChatMessage("m", s.event(["h", "b"]), round=1)
    assert verify_disclosure(s, exm_partitions["m"], msg) is Verdict.VERIFIED


def test_false_or_foreign_claims_are_rejected(exm_space, exm_partitions):
    s = exm_space
    wrong_cell = ChatMessage("m", s.event(["a"]), round=1)
    not_a_cell = ChatMessage("m", s.event(["h"]), round=1)
    assert verify_disclosure(s, exm_partitions["m"], wrong_cell) is Verdict.REJECTED
    assert verify_disclosure(s, exm_partitions["m"], not_a_cell) is Verdict.REJECTED


def test_apply_disclosure_intersects_public_event(exm_space, exm_partitions):
    s = exm_space
    public = PublicState.initial(s)
    msg = ChatMessage("m", s.event(["h", "b"]), 1).judged(Verdict.VERIFIED)
    after = apply_disclosure(public, msg)
    assert after.omega == s.event(["h", "b"])
    assert after.round == 2
    assert after.history == (msg,)

    second = ChatMessage("l", s.event(["h", "a"]), 2).judged(Verdict.VERIFIED)
    assert apply_disclosure(after, second).omega == s.event(["h"])


def test_unverified_messages_cannot_be_applied(exm_space):
    s = exm_space
    public = PublicState.initial(s)
    with pytest.raises(NotVerified):
        apply_disclosure(public, ChatMessage("m", s.event(["a"]), 1).judged(Verdict.REJECTED))
    with pytest.raises(NotVerified):
        apply_disclosure(public, ChatMessage("m", s.event(["h"]), 1))


def test_silence_only_advances_the_round(exm_space):
    public = PublicState.initial(exm_space)
    after = apply_silence(public)
    assert after.omega == public.omega and after.round == 2


def test_trajectory_length(exm_space):
    s = exm_space
    h = s.event(["h"])
    units = [s.event(["h", "b"]), s.event(["h", "a"])]
    # 1/3 -> 1/2 -> 1
    assert trajectory_length(s, h, s.full, units) == Fraction(2, 3)


def test_split_units_maximizes_price_travel():
    s = SampleSpace.build(["h", "a", "b", "c"], ["1/4", "1/4", "1/4", "1/4"], "h")
    h = s.event(["h"])
    wide = s.event(["h", "a", "b"])
    narrow = s.event(["h", "c"])
    info = wide & narrow
    order = split_units(s, h, info, PublicState.initial(s), [wide, narrow])
    # 1/4 -> 1/3 -> 1 and 1/4 -> 1/2 -> 1 tie on length 3/4; the lower index goes first
    assert order == [wide, narrow]


def test_split_units_prefers_a_detour():
    s = SampleSpace.build(["h", "x", "y", "z"], ["1/4"] * 4, "h")
    h = s.event(["h", "z"])
    down = s.event(["h", "x", "y"])
    up = s.event(["h", "z"])
    order = split_units(s, h, s.event(["h"]), PublicState.initial(s), [up, down])
    # 1/2 -> 1/3 -> 1 travels 5/6; going straight to 1 travels only 1/2
    assert order == [down, up]
    assert trajectory_length(s, h, s.full, order) == Fraction(5, 6)


def test_split_units_validates_units(exm_space):
    s = exm_space
    h = s.event(["h"])
    public = PublicState.initial(s)
    with pytest.raises(UnitsInconsistent):
        split_units(s, h, s.event(["h"]), public, [])
    with pytest.raises(UnitsInconsistent):
        split_units(s, h, s.event(["h"]), public, [s.event(["a", "b"])])
    with pytest.raises(UnitsInconsistent):
        split_units(s, h, s.event(["h"]), public, [s.event(["h", "b"])])
