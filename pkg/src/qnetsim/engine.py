"""Deterministic discrete-event core.

A :class:`Simulation` owns a virtual clock, a min-ordered event queue, and a
set of resumable processes.  Processes are plain Python generators that yield
:class:`Condition` objects; the engine resumes a process (at most once per
satisfied condition) with the condition's wake payload.

Equal-time events execute in strictly increasing insertion order, which makes
two runs with the same configuration and seed produce identical event traces.
"""

from __future__ import annotations

import heapq
import itertools
from typing import Callable, Optional

import numpy as np

from .errors import SimError


class _TargetGone:
    """Wake payload delivered when a condition's target was destroyed."""

    def __repr__(self):
        return "TARGET_GONE"


TARGET_GONE = _TargetGone()


# ---------------------------------------------------------------------------
# Conditions
# ---------------------------------------------------------------------------

class Condition:
    """One-shot wake-up condition.

    A condition is armed when a process yields it (or when a combinator arms
    it as a child), fires at most once, and may be cancelled — the losing
    children of an :class:`AnyOf` are cancelled on the first fire, so a
    pending timeout that already sits in the event queue becomes a no-op.
    """

    def __init__(self):
        self.sim: Optional[Simulation] = None
        self.proc: Optional[Process] = None
        self.fired = False
        self.cancelled = False
        self.value = None
        self._callbacks: list[Callable[[Condition], None]] = []

    def _arm(self, sim: "Simulation", proc: "Process") -> None:
        """Register with the firing source. May fire synchronously."""
        raise NotImplementedError

    def _fire(self, value=None) -> None:
        if self.fired or self.cancelled:
            return
        self.fired = True
        self.value = value
        callbacks, self._callbacks = self._callbacks, []
        for cb in callbacks:
            cb(self)

    def _cancel(self) -> None:
        if self.fired or self.cancelled:
            return
        self.cancelled = True
        self._callbacks = []
        self._detach()

    def _detach(self) -> None:
        """Remove any registration left with the firing source."""


class Timeout(Condition):
    """Fires ``delay`` time units after being armed."""

    def __init__(self, delay: float):
        super().__init__()
        if delay < 0:
            raise SimError("negative-delay", f"{delay}")
        self.delay = float(delay)

    def _arm(self, sim, proc):
        self.sim, self.proc = sim, proc
        sim._schedule(sim.now + self.delay, self._fire)


class ProcessDone(Condition):
    """Fires when ``target`` terminates; payload is its return value."""

    def __init__(self, target: "Process"):
        super().__init__()
        self.target = target

    def _arm(self, sim, proc):
        self.sim, self.proc = sim, proc
        if self.target.done:
            self._fire(self.target.result)
        else:
            self.target._done_waiters.append(self)

    def _detach(self):
        if self in self.target._done_waiters:
            self.target._done_waiters.remove(self)


class SignalWait(Condition):
    """Fires at the next batch of mutations on a :class:`Signal`."""

    def __init__(self, signal: "Signal"):
        super().__init__()
        self.signal = signal

    def _arm(self, sim, proc):
        self.sim, self.proc = sim, proc
        self.signal._subscribe(self)

    def _on_signal(self, payload) -> bool:
        self._fire(payload)
        return True  # satisfied: unsubscribe

    def _detach(self):
        self.signal._unsubscribe(self)


class AllOf(Condition):
    """Fires when every child has fired; payload is the list of child values."""

    def __init__(self, children):
        super().__init__()
        self.children = list(children)

    def _arm(self, sim, proc):
        self.sim, self.proc = sim, proc
        remaining = {id(c) for c in self.children if not c.fired}
        if not remaining:
            self._fire([c.value for c in self.children])
            return
        for child in self.children:
            child._callbacks.append(self._child_fired)
            child._arm(sim, proc)

    def _child_fired(self, child):
        if self.fired or self.cancelled:
            return
        if all(c.fired for c in self.children):
            self._fire([c.value for c in self.children])

    def _detach(self):
        for child in self.children:
            child._cancel()


class AnyOf(Condition):
    """Fires on the first child; the payload is the fired child condition.

    Losers are cancelled so the waiter is woken exactly once no matter how
    many children would eventually fire.
    """

    def __init__(self, children):
        super().__init__()
        self.children = list(children)

    def _arm(self, sim, proc):
        self.sim, self.proc = sim, proc
        for child in self.children:
            if self.fired:
                break
            child._callbacks.append(self._child_fired)
            child._arm(sim, proc)

    def _child_fired(self, child):
        if self.fired or self.cancelled:
            return
        self._fire(child)
        for other in self.children:
            if other is not child:
                other._cancel()

    def _detach(self):
        for child in self.children:
            child._cancel()


# ---------------------------------------------------------------------------
# Signals (change notification with per-event batching)
# ---------------------------------------------------------------------------

class Signal:
    """Change-notification source.

    Multiple :meth:`fire` calls inside one engine event wake subscribers
    once (level-triggered per mutation batch); subscribers whose predicate
    is not yet satisfied stay subscribed.
    """

    def __init__(self, sim: "Simulation"):
        self.sim = sim
        self._subscribers: list = []
        self._flush_pending = False
        self._destroyed = False

    def _subscribe(self, waiter):
        if self._destroyed:
            waiter._on_signal(TARGET_GONE)
            return
        self._subscribers.append(waiter)

    def _unsubscribe(self, waiter):
        if waiter in self._subscribers:
            self._subscribers.remove(waiter)

    def fire(self, payload=None):
        # Late subscribers re-check state on arm, so an empty subscriber
        # list needs no flush event at all.
        if self._destroyed or self._flush_pending or not self._subscribers:
            return
        self._flush_pending = True
        self.sim._schedule(self.sim.now, lambda: self._flush(payload))

    def _flush(self, payload):
        self._flush_pending = False
        waiters, self._subscribers = self._subscribers, []
        for w in waiters:
            if getattr(w, "cancelled", False):
                continue
            if not w._on_signal(payload):
                self._subscribers.append(w)

    def destroy(self):
        """Wake every subscriber with :data:`TARGET_GONE`; future waits fail fast."""
        self._destroyed = True
        waiters, self._subscribers = self._subscribers, []
        for w in waiters:
            if not getattr(w, "cancelled", False):
                w._on_signal(TARGET_GONE)


# ---------------------------------------------------------------------------
# Locks
# ---------------------------------------------------------------------------

class LockRequest(Condition):
    def __init__(self, lock: "Lock"):
        super().__init__()
        self.lock = lock

    def _arm(self, sim, proc):
        self.sim, self.proc = sim, proc
        self.lock._enqueue(self)

    def _detach(self):
        if self in self.lock._waiters:
            self.lock._waiters.remove(self)


class Lock:
    """FIFO mutual-exclusion lock; grants follow request order exactly."""

    _ids = itertools.count(1)

    def __init__(self, sim: "Simulation", name: str = ""):
        self.sim = sim
        self.id = next(Lock._ids)
        self.name = name or f"lock{self.id}"
        self.holder: Optional[Process] = None
        self._waiters: list[LockRequest] = []
        self._destroyed = False

    def acquire(self) -> LockRequest:
        """Return a condition that fires when the caller holds the lock."""
        return LockRequest(self)

    def _enqueue(self, req: LockRequest):
        if self._destroyed:
            req._fire(TARGET_GONE)
            return
        if self.holder is None and not self._waiters:
            self.holder = req.proc
            req._fire(self)
        else:
            self._waiters.append(req)

    def release(self):
        caller = self.sim._current
        if self.holder is not caller:
            raise SimError("not-holder", f"{self.name} held by {self.holder}")
        self.holder = None
        # Grant lazily in a fresh event (same timestamp, later insertion
        # order) so requests cancelled in between are skipped, never granted.
        self.sim._schedule(self.sim.now, self._try_grant)

    def _try_grant(self):
        if self.holder is not None or self._destroyed:
            return
        while self._waiters:
            req = self._waiters.pop(0)
            if req.cancelled:
                continue
            self.holder = req.proc
            req._fire(self)
            return

    def destroy(self):
        self._destroyed = True
        waiters, self._waiters = self._waiters, []
        for req in waiters:
            if not req.cancelled:
                req._fire(TARGET_GONE)

    @property
    def locked(self) -> bool:
        return self.holder is not None


# ---------------------------------------------------------------------------
# Processes and the simulation itself
# ---------------------------------------------------------------------------

class Process:
    """A resumable protocol state machine registered with the engine."""

    def __init__(self, pid: int, gen, name: str):
        self.id = pid
        self.gen = gen
        self.name = name
        self.done = False
        self.result = None
        self._done_waiters: list[ProcessDone] = []

    def __repr__(self):
        return f"<Process {self.id} {self.name}{' done' if self.done else ''}>"

    def done_condition(self) -> ProcessDone:
        return ProcessDone(self)


class Simulation:
    """A self-contained discrete-event simulation instance.

    Single-threaded logical execution; the instance owns one RNG stream, so
    every stochastic draw (entanglement success, Pauli sampling, measurement
    outcomes) consumes from it in event order and runs are reproducible.
    """

    def __init__(self, seed: int = 0):
        self.now: float = 0.0
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.closed = False
        self._queue: list = []  # (time, seq, fn)
        self._seq = itertools.count()
        self._pids = itertools.count(1)
        self._current: Optional[Process] = None
        self._tracers: list[Callable[[dict], None]] = []
        self.last_event_time: float = 0.0

    # -- trace ---------------------------------------------------------
    def add_tracer(self, fn: Callable[[dict], None]):
        self._tracers.append(fn)

    def trace(self, kind: str, **fields):
        if self._tracers:
            event = {"t": self.now, "kind": kind}
            event.update(fields)
            for fn in self._tracers:
                fn(event)

    # -- randomness funnel ----------------------------------------------
    def sample_outcome(self, probs) -> int:
        """Draw an index from a probability vector via the simulation RNG.

        All measurement-outcome and mixture-component draws go through here;
        tests may subclass and script it.
        """
        u = self.rng.random()
        acc = 0.0
        for i, p in enumerate(probs):
            acc += p
            if u < acc:
                return i
        return len(probs) - 1

    def bernoulli(self, p: float) -> bool:
        return self.sample_outcome([p, 1.0 - p]) == 0

    # -- scheduling core -------------------------------------------------
    def _schedule(self, t: float, fn: Callable[[], None]):
        if t < self.now:
            raise SimError("clock-regression", f"schedule at {t} < now {self.now}")
        heapq.heappush(self._queue, (t, next(self._seq), fn))

    def schedule_call(self, delay: float, fn: Callable[[], None]):
        """Run ``fn`` as its own event after ``delay``."""
        self._schedule(self.now + delay, fn)

    def spawn(self, proc_or_gen, name: str = "") -> Process:
        """Register a process; it is first resumed at the current time,
        before any later-timestamped event."""
        if self.closed:
            raise SimError("engine-closed")
        gen = proc_or_gen() if callable(proc_or_gen) else proc_or_gen
        pname = name or getattr(proc_or_gen, "name", "") or getattr(
            proc_or_gen, "__name__", "") or type(proc_or_gen).__name__
        proc = Process(next(self._pids), gen, pname)
        self.trace("spawn", pid=proc.id, name=proc.name)
        self._schedule(self.now, lambda: self._resume(proc, None))
        return proc

    def _resume(self, proc: Process, payload):
        if proc.done:
            raise SimError("resume-after-done", proc.name)
        self.trace("resume", pid=proc.id, name=proc.name)
        self._current = proc
        try:
            condition = proc.gen.send(payload)
        except StopIteration as stop:
            proc.done = True
            proc.result = stop.value
            self.trace("done", pid=proc.id, name=proc.name)
            waiters, proc._done_waiters = proc._done_waiters, []
            for w in waiters:
                w._fire(proc.result)
            return
        finally:
            self._current = None
        if not isinstance(condition, Condition):
            raise SimError("bad-yield", f"{proc.name} yielded {condition!r}")
        condition._callbacks.append(
            lambda c: self._schedule(self.now, lambda: self._resume(proc, c.value)))
        condition._arm(self, proc)

    # -- run loops --------------------------------------------------------
    def run_until(self, t_end: float) -> float:
        """Process every event with fire-time <= ``t_end``; the clock ends
        at ``t_end`` even if the queue drains early."""
        if t_end < self.now:
            raise SimError("clock-regression", f"run_until {t_end} < now {self.now}")
        while self._queue and self._queue[0][0] <= t_end:
            t, _, fn = heapq.heappop(self._queue)
            self.now = t
            self.last_event_time = t
            fn()
        self.now = t_end
        return self.now

    def run(self) -> float:
        """Run to quiescence (no pending events); returns the final time."""
        while self._queue:
            t, _, fn = heapq.heappop(self._queue)
            self.now = t
            self.last_event_time = t
            fn()
        return self.now

    @property
    def quiescent(self) -> bool:
        return not self._queue

    def close(self):
        self.closed = True

    # -- factories ---------------------------------------------------------
    def timeout(self, delay: float) -> Timeout:
        return Timeout(delay)

    def lock(self, name: str = "") -> Lock:
        return Lock(self, name)

    def signal(self) -> Signal:
        return Signal(self)
