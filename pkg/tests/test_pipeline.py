import random

from ringcc.model import Age, Arrival, Connectivity, DumpLabels, EdgeCount, IDLE
from ringcc.aging import TimestampThreshold
from ringcc.pipeline import run_pipelined
from ringcc.ring import Ring, RingConfig


def random_items(rng, n, nverts, with_age=True):
    items = []
    for i in range(n):
        r = rng.random()
        if r < 0.6:
            items.append(Arrival(rng.randrange(nverts), rng.randrange(nverts)))
        elif r < 0.7 and with_age and i > 20:
            items.append(Age(TimestampThreshold(rng.randrange(max(1, i - 40), i))))
        elif r < 0.85:
            items.append(Connectivity(rng.randrange(nverts), rng.randrange(nverts)))
        else:
            items.append(EdgeCount())
    return items


def test_pipelined_transcript_matches_lockstep():
    rng = random.Random(77)
    for trial in range(5):
        p = rng.choice([2, 3, 5])
        s = rng.choice([20, 50])
        k = rng.choice([2, 3, 4])
        items = random_items(rng, rng.randrange(80, 200), 15)
        items += [IDLE] * (6 * p + 2 * p * s // (k - 1) + 16)
        cfg_a = RingConfig(p=p, s=s, k=k, seed=9)
        cfg_b = RingConfig(p=p, s=s, k=k, seed=9)
        lock = Ring(cfg_a)
        lock.run_stream(items, drain=False)
        piped = run_pipelined(cfg_b, items)
        assert piped.text() == lock.transcript.text(), f"trial {trial}"


def test_pipelined_with_dump_query():
    items = [Arrival(i % 7, (i + 1) % 7) for i in range(25)]
    items.append(DumpLabels())
    items += [IDLE] * 60
    cfg = RingConfig(p=3, s=10, k=3, seed=1)
    lock = Ring(RingConfig(p=3, s=10, k=3, seed=1))
    lock.run_stream(items, drain=False)
    piped = run_pipelined(cfg, items)
    assert piped.text() == lock.transcript.text()
