"""Slot-level behaviors of a single ring position, driven through tiny rings
so the bundle plumbing stays realistic."""

import random

from ringcc.aging import TimestampThreshold
from ringcc.model import Age, Arrival, Bundle, IDLE, LOADER_TOKEN, LabeledEdge
from ringcc.processor import Packer, SlotOverflow
from ringcc.ring import Ring, RingConfig

import pytest


def cfg(p=3, s=5, k=4, **kw):
    kw.setdefault("validate", True)
    return RingConfig(p=p, s=s, k=k, **kw)


def test_packer_spills_into_free_primary_only():
    pk = Packer(3)
    pk.pack("a")
    pk.pack("b")
    pk.pack("c")  # payload full: lands in the primary slot
    b = pk.bundle()
    assert b.primary == "c" and list(b.payload) == ["a", "b"]
    pk = Packer(3)
    pk.set_primary("p")
    pk.pack("a")
    pk.pack("b")
    with pytest.raises(SlotOverflow):
        pk.pack("c")


def test_empty_bundle_reuse():
    pk = Packer(3)
    assert pk.bundle().is_empty()


def test_builder_token_moves_building_duty():
    ring = Ring(cfg(p=3, s=3, k=3))
    for i in range(4):  # path graph: all tree edges; head seals after 3
        ring.tick(Arrival(i, i + 1))
    ring.drain()
    head, nxt = ring.processors[0], ring.processors[1]
    assert head.sealed and not head.is_builder
    assert nxt.is_builder
    assert len(head.tree) == 3 and len(nxt.tree) == 1


def test_builder_jettisons_nontree_for_tree():
    # head capacity 3: two tree edges plus one non-tree fill it; the next
    # tree edge displaces the non-tree downstream
    ring = Ring(cfg(p=3, s=3, k=3))
    for u, v in [(1, 2), (2, 3), (1, 3), (3, 4)]:
        ring.tick(Arrival(u, v))
    ring.drain()
    head = ring.processors[0]
    assert len(head.tree) == 3
    assert len(head.nontree) == 0
    assert ring.stored_edges().keys() == {(1, 2), (2, 3), (1, 3), (3, 4)}
    assert ring.violations == []


def test_loader_packs_unresolved_then_token():
    # builder/loader arithmetic: a processor with three unresolved edges and
    # room in the bundle emits all three and the loader token together
    ring = Ring(cfg(p=2, s=8, k=6))
    proc = ring.processors[1]
    proc.aging = True
    proc.is_loader = True
    proc.predicate = TimestampThreshold(0)
    for i in range(3):
        e = LabeledEdge(100 + i, 200 + i, t=5)
        proc.unresolved.append(e)
        proc.dup[e.key()] = e
        proc.stored += 1
    out = proc.process_bundle(Bundle())
    kinds = [type(x).__name__ for x in out.payload]
    assert kinds == ["LabeledEdge", "LabeledEdge", "LabeledEdge", "LoaderToken"]
    assert not proc.is_loader and not proc.aging


def test_loader_token_waits_for_payload_space():
    ring = Ring(cfg(p=2, s=8, k=2))
    proc = ring.processors[1]
    proc.aging = True
    proc.is_loader = True
    proc.predicate = TimestampThreshold(0)
    # incoming payload already occupies the only payload slot
    passing = LabeledEdge(7, 8, t=1)
    out = proc.process_bundle(Bundle(None, [passing]))
    assert proc.is_loader  # token deferred, never displaces an edge
    out = proc.process_bundle(Bundle())
    assert any(x is LOADER_TOKEN or type(x).__name__ == "LoaderToken"
               for x in out.payload)
    assert not proc.is_loader


def test_duplicate_refresh_keeps_newest_timestamp():
    ring = Ring(cfg(p=2, s=5, k=3))
    ring.tick(Arrival(1, 2))
    ring.drain()
    rec = ring.processors[0].dup[(1, 2)]
    rec.t = 50  # pretend a later refresh already landed
    ring.tick(Arrival(2, 1))  # older than the stored copy now
    ring.drain()
    assert ring.processors[0].dup[(1, 2)].t == 50


def test_head_testing_is_bounded_per_tick():
    # k-1 untested edges are examined per tick at the head
    ring = Ring(cfg(p=2, s=10, k=3))
    for i in range(8):
        ring.tick(Arrival(i, i + 1))
    ring.tick(Age(TimestampThreshold(100)))  # deletes everything
    head = ring.processors[0]
    # the arrival tick of the token already ran one k-1 testing batch
    assert len(head.untested) == 6
    ring.tick(IDLE)
    assert len(head.untested) == 4
    ring.tick(IDLE)
    assert len(head.untested) == 2
    ring.drain()
    assert ring.stored_edges() == {}
    assert ring.violations == []


def test_store_counts_follow_moves():
    rng = random.Random(0)
    ring = Ring(cfg(p=3, s=12, k=3))
    for _ in range(40):
        ring.tick(Arrival(rng.randrange(8), rng.randrange(8)))
    ring.drain()
    for pr in ring.processors:
        assert pr.stored == (len(pr.tree) + len(pr.nontree)
                             + len(pr.untested) + len(pr.unresolved))
        assert pr.stored == len(pr.dup)
