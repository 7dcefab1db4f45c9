"""Pipelined engine: one thread per processor, depth-limited handoff queues.

Every processor sees exactly the same sequence of input bundles as under the
lockstep engine, so for any item sequence the transcript is byte-identical;
only wall-clock concurrency differs. The I/O side stays on the caller's
thread and owns the tick counter.

No implicit drain happens here: callers append explicit idle items so the
same sequence can be replayed on both engines.
"""

from __future__ import annotations

import queue
import threading

from .model import EMPTY_BUNDLE
from .processor import Processor
from .ring import IOJunction, SystemFailed, Transcript

_STOP = object()


def _worker(proc, q_in, q_out):
    while True:
        b = q_in.get()
        if b is _STOP:
            q_out.put(_STOP)
            return
        q_out.put(proc.process_bundle(b))


def run_pipelined(config, items):
    """Run the item sequence on the threaded engine; returns the transcript."""
    transcript = Transcript()
    junction = IOJunction(config, transcript)
    procs = [Processor(i, config) for i in range(config.p)]
    # queues[i] feeds processor i; queues[p] is the tail-to-junction return
    queues = [queue.Queue(maxsize=2) for _ in range(config.p + 1)]
    threads = [threading.Thread(target=_worker, args=(procs[i], queues[i], queues[i + 1]),
                                daemon=True)
               for i in range(config.p)]
    for th in threads:
        th.start()
    for i in range(1, config.p + 1):
        queues[i].put(EMPTY_BUNDLE)  # primes the one-tick hop delay on every link

    tick = 0
    failure = None
    try:
        for item in items:
            ret = queues[config.p].get()
            head_in = junction.step(tick, ret, item)
            queues[0].put(head_in)
            tick += 1
    except SystemFailed as exc:
        failure = exc
    queues[0].put(_STOP)
    while queues[config.p].get() is not _STOP:
        pass
    for th in threads:
        th.join(timeout=5)
    if failure is not None:
        raise failure
    return transcript
