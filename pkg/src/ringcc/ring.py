"""The ring system: configuration, the I/O junction, the lockstep engine,
transcript recording, and the invariant auditor.

One stream item enters per tick. The junction extracts whatever exits the
tail (query answers, dump output, completed tokens), merges the remaining
payload with the new item into the head's next bundle, and keeps the
transcript. Processors hand bundles strictly one hop per tick, so a constant
query injected at tick t exits at tick t+p.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .aging import StatsProbe, SurvivorProbe, TimestampThreshold
from .model import (
    EMPTY_BUNDLE,
    Age,
    AgeRequest,
    AgingToken,
    ArmAutoAge,
    Arrival,
    AutoAge,
    Bundle,
    Connectivity,
    DumpLabels,
    EdgeCount,
    FailSignal,
    Idle,
    LabeledEdge,
    LoaderToken,
    MaxComponent,
    SmallComponents,
    SpanningTree,
)
from .processor import Processor
from .queries import (
    ActiveQuery,
    ConnQuery,
    CountQuery,
    DumpCommand,
    DumpEnd,
    DumpPair,
    MaxCommand,
    PhaseDone,
    QueryDone,
    SizeMsg,
    SmallCommand,
    TreeCommand,
    TreeDumpEnd,
    TreeEdgeMsg,
    VertexMsg,
)
from .unionfind import min_naming


class SystemFailed(Exception):
    """Storage (or union capacity) is exhausted; the run cannot continue."""

    def __init__(self, tick, reason):
        super().__init__(f"tick {tick}: {reason}")
        self.tick = tick
        self.reason = reason


@dataclass
class Violation:
    tick: int
    kind: str
    index: int
    detail: str


@dataclass
class RingConfig:
    p: int
    s: int
    k: int = 5
    naming: Callable = min_naming
    validate: bool = False
    seed: int = 0
    reservoir: int = 100
    auto_age_c: Optional[float] = None
    auto_age_margin: float = 1.25
    search_circuits: int = 16
    taps: bool = False
    record_inputs: bool = True
    metrics: bool = False

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("need at least one processor")
        if self.s < 1:
            raise ValueError("per-processor capacity must be >= 1")
        if self.k < 2:
            raise ValueError("bundles need a primary and at least one payload slot")

    @property
    def total_capacity(self):
        return self.p * self.s


class Transcript:
    """Chronological record of everything that crossed the I/O boundary."""

    def __init__(self):
        self.events = []

    def record_in(self, tick, text):
        self.events.append(("IN", tick, text))

    def record_out(self, tick, qid, tag, *args):
        self.events.append(("OUT", tick, qid, tag) + args)

    def record_evt(self, tick, text):
        self.events.append(("EVT", tick, text))

    def outputs(self, tag=None):
        out = [e for e in self.events if e[0] == "OUT"]
        if tag is not None:
            out = [e for e in out if e[3] == tag]
        return out

    def lines(self):
        rendered = []
        for e in self.events:
            if e[0] == "IN":
                rendered.append(f"{e[1]} IN {e[2]}")
            elif e[0] == "EVT":
                rendered.append(f"{e[1]} EVT {e[2]}")
            else:
                _, tick, qid, tag, *args = e
                if tag == "answer":
                    body = "true" if args[0] else "false"
                elif tag in ("count", "max"):
                    body = str(args[0])
                elif tag == "member":
                    body = f"member {args[0]} {args[1]}"
                elif tag == "tree-edge":
                    body = f"edge {args[0]} {args[1]}"
                elif tag == "dump":
                    body = f"label {args[0]} {args[1]}"
                else:
                    body = tag if not args else f"{tag} {' '.join(map(str, args))}"
                rendered.append(f"{tick} OUT q{qid} {body}")
        return rendered

    def text(self):
        return "\n".join(self.lines()) + "\n"


class RingHooks:
    """Validation instrumentation shared by all processors.

    Tracks a global stored-copy count per canonical key (at most one copy in
    normal mode, two while a deletion is rebuilding, exactly one again at
    completion) and collects violations as data.
    """

    def __init__(self, ring):
        self.ring = ring
        self.counts = {}
        self.twice = set()

    def stored(self, key, index):
        c = self.counts.get(key, 0) + 1
        self.counts[key] = c
        if c == 2:
            if self.ring.junction.mode == "aging":
                self.twice.add(key)
            else:
                self.violation("duplicate-store", index, f"{key} stored twice in normal mode")
        elif c > 2:
            self.violation("duplicate-store", index, f"{key} stored {c} times")

    def removed(self, key, index):
        c = self.counts.get(key, 0) - 1
        if c <= 0:
            self.counts.pop(key, None)
        else:
            self.counts[key] = c
        if c < 2:
            self.twice.discard(key)

    def violation(self, kind, index, detail):
        self.ring.violations.append(Violation(self.ring.t, kind, index, detail))

    def aging_completed(self):
        if self.twice:
            self.violation("post-aging-duplicate", -1,
                           f"{len(self.twice)} keys still stored twice")
        self.twice.clear()


class IOJunction:
    """The I/O processor: feeds the head, extracts what the tail returns."""

    def __init__(self, config, transcript, ring=None):
        self.config = config
        self.transcript = transcript
        self.ring = ring
        self.mode = "normal"
        self.pending = deque()
        self.next_qid = 0
        self.active = None  # at most one non-constant query in flight
        self.ring_sealed = False  # builder duty left the tail; no one can union
        # a new deletion must wait for the previous one's trailing recycled
        # edges to finish wrapping, or they would slip behind the new token
        self.age_hold_until = 0

    # -- outgoing side -------------------------------------------------------

    def step(self, tick, ret, item):
        reenter = []
        reinject = []
        primary_override = self._extract(tick, ret, reenter, reinject)
        primary = self._inject(tick, item, primary_override)
        payload = reenter + reinject
        if len(payload) > self.config.k - 1:
            raise SystemFailed(tick, "returning payload exceeds bundle capacity")
        if primary is None and not payload:
            return EMPTY_BUNDLE
        return Bundle(primary, payload)

    def _extract(self, tick, ret, reenter, reinject):
        ts = self.transcript
        if ret.builder_token:
            # every processor is full of tree edges; harmless until an edge
            # that needs a union comes back around
            self.ring_sealed = True
            ts.record_evt(tick, "ring sealed: no processor accepting tree edges")
        override = None
        prim = ret.primary
        if prim is not None:
            t = type(prim)
            if t is ConnQuery:
                ts.record_out(tick, prim.qid, "answer", prim.answer)
            elif t is CountQuery:
                ts.record_out(tick, prim.qid, "count", prim.n)
            elif t is AgingToken:
                ts.record_evt(tick, "aging token completed its circuit")
            elif t is LabeledEdge:
                if self.ring_sealed:
                    raise SystemFailed(
                        tick, "union capacity exhausted: unsettled edge with no builder")
                # an unsettled edge wrapped all the way around; give it the
                # head's primary slot and delay the input stream one tick
                ts.record_evt(tick, "input deferred: returning edge takes the primary slot")
                override = prim
            elif t is FailSignal:
                raise SystemFailed(tick, f"storage exhausted at processor {prim.index}")
            elif t in (DumpCommand, TreeCommand, SmallCommand, MaxCommand, ArmAutoAge):
                pass  # command finished its circuit
            else:
                ts.record_evt(tick, f"unrecognized return {prim!r}")
        for item in ret.payload:
            if item is None:
                continue
            t = type(item)
            if t is LabeledEdge:
                reenter.append(item)
            elif t is LoaderToken:
                self.mode = "normal"
                self.age_hold_until = tick + self.config.p + 1
                ts.record_evt(tick, "aging complete; queries re-enabled")
                if self.ring is not None:
                    self.ring._aging_complete(tick)
            elif t is DumpPair:
                if self.active is not None:
                    ts.record_out(tick, self.active.qid, "dump", item.block, item.name)
            elif t is TreeEdgeMsg:
                if self.active is not None:
                    ts.record_out(tick, self.active.qid, "tree-edge", item.u, item.v)
            elif t is SizeMsg:
                if self.active is not None and self.active.kind == "max":
                    if item.size > self.active.max_size:
                        self.active.max_size = item.size
                elif (self.active is not None and self.active.kind == "small"
                      and item.size == 1 and not item.wrapped):
                    # self-loop orphan claim: one extra circuit lets the
                    # vertex's real consumer cancel it, or its emitter
                    # confirm it
                    item.wrapped = True
                    reinject.append(item)
            elif t is VertexMsg:
                if self.active is not None:
                    ts.record_out(tick, self.active.qid, "member", item.name, item.vertex)
            elif t is PhaseDone:
                if self.active is not None and self.active.kind == "small":
                    reinject.append(item)  # the head starts the member phase
                elif self.active is not None and self.active.kind == "max":
                    ts.record_out(tick, self.active.qid, "max", self.active.max_size)
                    self.active = None
            elif t in (QueryDone, DumpEnd, TreeDumpEnd):
                if self.active is not None:
                    ts.record_out(tick, self.active.qid, "done")
                    self.active = None
            elif t is StatsProbe or t is SurvivorProbe:
                reinject.append(item)  # policy probe heading back to the tail
            elif t is AgeRequest:
                ts.record_evt(tick, f"auto-age requested threshold {item.threshold}")
                self.pending.append(Age(TimestampThreshold(item.threshold)))
            elif t is FailSignal:
                raise SystemFailed(tick, f"storage exhausted at processor {item.index}")
            else:
                ts.record_evt(tick, f"unrecognized return {item!r}")
        return override

    # -- incoming side -------------------------------------------------------

    def _inject(self, tick, item, primary_override):
        ts = self.transcript
        if primary_override is not None:
            if item is not None and type(item) is not Idle:
                self.pending.append(item)
            if self.config.record_inputs:
                ts.record_in(tick, "(deferred)")
            return primary_override
        if self.pending:
            if item is not None and type(item) is not Idle:
                self.pending.append(item)
                ts.record_evt(tick, "input deferred behind pending commands")
            item = self.pending.popleft()
        if type(item) is Age and self.mode != "aging" and tick < self.age_hold_until:
            # recycled edges from the previous deletion may still be wrapping;
            # hold the command at the front of the queue and idle this tick
            self.pending.appendleft(item)
            item = None
        if item is None or type(item) is Idle:
            if self.config.record_inputs:
                ts.record_in(tick, ".")
            return None
        if self.config.record_inputs:
            ts.record_in(tick, item.render())
        t = type(item)
        if t is Arrival:
            return LabeledEdge(item.u, item.v, t=tick)
        if t is Connectivity:
            qid = self._qid()
            if self._queries_suspended(tick):
                ts.record_out(tick, qid, "busy")
                return None
            return ConnQuery(qid, item.u, item.v, tick)
        if t is EdgeCount:
            qid = self._qid()
            if self._queries_suspended(tick):
                ts.record_out(tick, qid, "busy")
                return None
            return CountQuery(qid, tick)
        if t in (MaxComponent, SmallComponents, SpanningTree, DumpLabels):
            qid = self._qid()
            if self._queries_suspended(tick):
                ts.record_out(tick, qid, "busy")
                return None
            if self.active is not None:
                ts.record_out(tick, qid, "busy")
                return None
            if t is MaxComponent:
                self.active = ActiveQuery(qid, "max", tick)
                return MaxCommand(qid)
            if t is SmallComponents:
                self.active = ActiveQuery(qid, "small", tick, item.limit)
                return SmallCommand(qid, item.limit)
            if t is SpanningTree:
                self.active = ActiveQuery(qid, "tree", tick)
                return TreeCommand(qid)
            self.active = ActiveQuery(qid, "dump", tick)
            return DumpCommand(qid)
        if t is Age:
            if self.mode == "aging":
                ts.record_evt(tick, "age command ignored: deletion already active")
                return None
            if self.active is not None:
                ts.record_out(tick, self.active.qid, "aborted")
                self.active = None
            self.mode = "aging"
            self.ring_sealed = False  # deletion restarts building at the head
            ts.record_evt(tick, "aging started")
            if self.ring is not None:
                self.ring._aging_started(tick)
            return AgingToken(item.predicate)
        if t is AutoAge:
            return ArmAutoAge(item.target_c)
        ts.record_evt(tick, f"unrecognized stream item {item!r}")
        return None

    def _qid(self):
        q = self.next_qid
        self.next_qid += 1
        return q

    def _queries_suspended(self, tick):
        """Queries stay suspended until the last recycled edges of a just
        finished deletion have re-entered and settled; a query sharing a
        bundle with one of them would race its contribution."""
        return self.mode == "aging" or tick < self.age_hold_until

    def quiescent(self):
        return self.mode == "normal" and not self.pending and self.active is None


class Ring:
    """Lockstep engine: every processor advances once per tick, and bundles
    move exactly one hop per tick."""

    def __init__(self, config):
        self.config = config
        self.t = 0
        self.transcript = Transcript()
        self.violations = []
        self.junction = IOJunction(config, self.transcript, ring=self)
        self.hooks = RingHooks(self) if config.validate else None
        self.processors = [Processor(i, config, self.hooks) for i in range(config.p)]
        self.links = [EMPTY_BUNDLE] * config.p  # links[i]: pending input of p_i (i >= 1)
        self.junction_return = EMPTY_BUNDLE
        self.failed = False
        self.aging_ticks = 0
        self.suspended_ticks = 0  # aging plus the post-deletion settle window
        self.aging_started_tick = None
        self.aging_log = []
        self._pre_aging_stored = 0
        self.metrics = [] if config.metrics else None
        if config.taps:
            self.tap_edges = [[] for _ in range(config.p)]
            self.tap_dump = [[] for _ in range(config.p)]
        else:
            self.tap_edges = self.tap_dump = None

    # -- driving ---------------------------------------------------------------

    def tick(self, item=None):
        if self.failed:
            raise SystemFailed(self.t, "system already failed")
        try:
            head_in = self.junction.step(self.t, self.junction_return, item)
        except SystemFailed:
            self.failed = True
            raise
        procs = self.processors
        p = self.config.p
        outs = [procs[0].process_bundle(head_in)]
        for i in range(1, p):
            outs.append(procs[i].process_bundle(self.links[i]))
        for i in range(1, p):
            self.links[i] = outs[i - 1]
        self.junction_return = outs[p - 1]
        if self.junction.mode == "aging":
            self.aging_ticks += 1
        if self.junction._queries_suspended(self.t):
            self.suspended_ticks += 1
        if self.tap_edges is not None:
            self._record_taps(outs)
        if self.hooks is not None:
            self._audit_tick(outs)
        if self.metrics is not None:
            self.metrics.append(self.metrics_row())
        self.t += 1

    def run_stream(self, items, drain=True):
        for item in items:
            self.tick(item)
        if drain:
            self.drain()
        return self.transcript

    def drain(self, max_ticks=None):
        """Idle ticks until nothing is in flight. A full system in normal
        mode is quiescent; only unfinished deletions or queries keep this
        running."""
        if max_ticks is None:
            cfg = self.config
            max_ticks = 6 * cfg.p + 2 * cfg.total_capacity // (cfg.k - 1) + 64
        for _ in range(max_ticks):
            if self.quiescent():
                return
            self.tick(None)
        if not self.quiescent():
            raise RuntimeError(f"ring did not quiesce within {max_ticks} idle ticks")

    def quiescent(self):
        if not self.junction.quiescent():
            return False
        if not self.junction_return.is_empty():
            return False
        for b in self.links[1:]:
            if not b.is_empty():
                return False
        for proc in self.processors:
            if proc.outq or proc.aging:
                return False
            if proc.monitor is not None and proc.monitor.phase in ("stats", "search"):
                return False
        return True

    # -- state inspection --------------------------------------------------------

    def stored_total(self):
        return sum(pr.stored for pr in self.processors)

    def free_space(self):
        return self.config.total_capacity - self.stored_total()

    def stored_edges(self):
        """Canonical key -> newest timestamp over every per-processor store."""
        out = {}
        for pr in self.processors:
            for key, e in pr.dup.items():
                if key not in out or e.t > out[key]:
                    out[key] = e.t
        return out

    def system_edges(self):
        """Stored plus in-transit edges (transit copies of a stored edge are
        merged onto the newest timestamp)."""
        out = self.stored_edges()

        def fold(bundle):
            items = [bundle.primary] + list(bundle.payload)
            for it in items:
                if type(it) is LabeledEdge:
                    key = it.key()
                    if key not in out or it.t > out[key]:
                        out[key] = it.t

        fold(self.junction_return)
        for b in self.links[1:]:
            fold(b)
        return out

    def metrics_row(self):
        procs = self.processors
        tree = sum(len(pr.tree) for pr in procs)
        nontree = sum(len(pr.nontree) for pr in procs)
        untested = sum(len(pr.untested) for pr in procs)
        unresolved = sum(len(pr.unresolved) for pr in procs)
        stored = tree + nontree + untested + unresolved
        builder = next((pr.index for pr in procs if pr.is_builder), -1)
        loader = next((pr.index for pr in procs if pr.is_loader), -1)
        return (self.t, self.junction.mode, stored, tree, nontree, untested,
                unresolved, builder, loader, self.config.total_capacity - stored)

    # -- aging bookkeeping ---------------------------------------------------------

    def _aging_started(self, tick):
        self.aging_started_tick = tick
        self._pre_aging_stored = self.stored_total()
        for pr in self.processors:
            pr.deletions = 0

    def _aging_complete(self, tick):
        deleted = sum(pr.deletions for pr in self.processors)
        self.aging_log.append({
            "started": self.aging_started_tick,
            "completed": tick,
            "deleted": deleted,
            "pre_stored": self._pre_aging_stored,
            "survivors": self._pre_aging_stored - deleted,
            "stored_now": self.stored_total(),
        })
        if self.hooks is not None:
            self.hooks.aging_completed()

    # -- instrumentation ---------------------------------------------------------

    def _record_taps(self, outs):
        aging = self.junction.mode == "aging"
        for i, out in enumerate(outs):
            slots = [out.primary]
            slots.extend(out.payload)
            edges = self.tap_edges[i]
            dumps = self.tap_dump[i]
            for it in slots:
                t = type(it)
                if t is LabeledEdge:
                    if not aging and it.lu != it.lv:
                        edges.append(it.snapshot())
                elif t is DumpPair:
                    dumps.append((it.block, it.name))

    def _audit_tick(self, outs):
        for i, out in enumerate(outs):
            if out.occupied() > self.config.k:
                self.violations.append(Violation(
                    self.t, "slot-overflow", i, f"{out.occupied()} occupied slots"))
        self.violations.extend(self.audit_invariants())

    def audit_invariants(self):
        """Layout invariants over the current state; empty list means clean.

        While a deletion token is still propagating, processors it has not
        reached keep their old stores, so the layout checks cover only the
        prefix that has switched regimes.
        """
        found = []
        procs = self.processors
        p = self.config.p
        s = self.config.s
        aging = self.junction.mode == "aging"
        scope = p
        if aging and self.aging_started_tick is not None:
            scope = min(p, self.t - self.aging_started_tick + 1)
        in_scope = procs[:scope]

        builders = [pr.index for pr in in_scope if pr.is_builder]
        if len(builders) > 1:
            found.append(Violation(self.t, "builder-count", -1,
                                   f"{len(builders)} builders in scope {scope}"))
        b = builders[0] if builders else self._builder_token_position(scope)
        if b is None:
            found.append(Violation(self.t, "builder-count", -1,
                                   f"no builder in scope {scope}"))
        else:
            for pr in in_scope:
                ntree = len(pr.tree)
                if pr.index < b and ntree != s:
                    found.append(Violation(self.t, "tree-prefix", pr.index,
                                           f"sealed processor holds {ntree}/{s} tree edges"))
                if pr.index > b and ntree != 0:
                    found.append(Violation(self.t, "tree-downstream", pr.index,
                                           f"{ntree} tree edges downstream of builder {b}"))

        if not aging and self.t >= self.junction.age_hold_until:
            # steady-state packing; right after a deletion, trailing recycled
            # edges may still be refilling the transient hole at the head.
            # During a rebuild this clause is owned by the jeopardy exception:
            # an overloaded builder/loader legitimately parks edges in the
            # first open space further downstream.
            first_space = next((pr.index for pr in in_scope if pr.stored < s), scope)
            for pr in in_scope:
                if pr.index > first_space and (pr.tree or pr.nontree):
                    found.append(Violation(self.t, "space-prefix", pr.index,
                                           f"resolved edges beyond first open space {first_space}"))

        if aging:
            loader = next((pr.index for pr in in_scope if pr.is_loader), None)
            if loader is None:
                loader = self._loader_token_position(scope)
            if loader is not None:
                if builders and len(builders) == 1 and builders[0] > loader:
                    found.append(Violation(self.t, "builder-past-loader", builders[0],
                                           f"builder {builders[0]} > loader {loader}"))
                for pr in in_scope:
                    if pr.index < loader and pr.unresolved:
                        found.append(Violation(self.t, "unresolved-upstream", pr.index,
                                               f"{len(pr.unresolved)} unresolved before loader {loader}"))
        return found

    def _loader_token_position(self, scope):
        # token in flight: it sits in the link feeding its next holder
        for i in range(1, self.config.p):
            for it in self.links[i].payload:
                if type(it) is LoaderToken:
                    return i
        for it in self.junction_return.payload:
            if type(it) is LoaderToken:
                return self.config.p
        return None

    def _builder_token_position(self, scope):
        for i in range(1, self.config.p):
            if self.links[i].builder_token:
                return i
        if self.junction_return.builder_token or self.junction.ring_sealed:
            return self.config.p  # sealed ring: every position is upstream
        return None

    # -- full-scan checks (boundary audits and tests) ------------------------------

    def audit_full(self):
        """O(S) checks: per-key copy counts and union-find conservation."""
        found = []
        counts = {}
        for pr in self.processors:
            for key in pr.dup:
                counts[key] = counts.get(key, 0) + 1
        limit = 2 if self.junction.mode == "aging" else 1
        for key, c in counts.items():
            if c > limit:
                found.append(Violation(self.t, "copy-count", -1, f"{key} stored {c}x"))
        for pr in self.processors:
            lc = pr.lc
            prim = sum(1 for b in lc._order if lc._prim_vertex[b] is not None)
            total = sum(lc._count.values())
            if prim != total:
                found.append(Violation(self.t, "count-conservation", pr.index,
                                       f"component counts sum {total}, primitives {prim}"))
            for b in lc._order:
                if lc.find(b) not in lc.parent:
                    found.append(Violation(self.t, "nesting", pr.index,
                                           f"block {b} resolves outside this processor"))
        return found
