"""Discrete-time Gang EDF simulator.

EDF priority over gang jobs with first-fit spatial allocation: at every
unit slot boundary the unfinished released jobs are ordered by (absolute
deadline, task index) and walked in order; each job whose width fits the
processors still free in the slot is allocated (lowest-numbered free
processors first) and jobs that do not fit are skipped without blocking
the rest of the list.  Time is exact: integer parameters, unit slots,
full preemption at slot boundaries only.

The synchronous periodic arrival sequence (all tasks release at 0 and
every period thereafter) is one legal sporadic scenario, so a deadline
miss found here is a definitive negative certificate.  The converse does
not hold: a clean synchronous run does not prove schedulability over all
sporadic arrival sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .model import TaskSystem

# Refuse-to-run guard for auto horizons; hyperperiods beyond this are not
# simulated.
HORIZON_GUARD = 2**48


class HorizonOverflowError(RuntimeError):
    """The requested simulation horizon exceeds the configured guard."""


@dataclass
class Job:
    """One released job; remaining counts down from wcet."""

    task_index: int
    release: int
    deadline: int  # absolute: release + relative deadline
    width: int
    remaining: int


# One slot entry per allocated job: (task index, processors), processors
# ascending; entries appear in allocation (priority) order.
SlotAllocation = tuple[tuple[int, tuple[int, ...]], ...]


@dataclass(frozen=True)
class ScheduleTrace:
    horizon: int
    slots: tuple[SlotAllocation, ...]  # shorter than horizon if stopped at a miss
    first_miss: Optional[tuple[int, int]]  # (task index, absolute deadline)


def hyperperiod(ts: TaskSystem, limit: int = HORIZON_GUARD) -> int:
    """lcm of all periods; raises HorizonOverflowError above `limit` slots."""
    h = math.lcm(*(t.period for t in ts.tasks))
    if h > limit:
        raise HorizonOverflowError(f"hyperperiod {h} exceeds guard {limit}")
    return h


def simulate_synchronous(
    ts: TaskSystem,
    horizon: Optional[int] = None,
    stop_on_miss: bool = True,
) -> ScheduleTrace:
    """Simulate the synchronous periodic scenario over `horizon` slots.

    horizon=None means one hyperperiod, which is sufficient for a
    go/no-go answer: with constrained deadlines and no miss, every job
    released before the hyperperiod has completed by it, so the system
    state at the hyperperiod repeats the state at time 0.

    A miss is recorded the first time a slot boundary passes some job's
    absolute deadline with work remaining; by default the simulation then
    stops (slots cover the boundary's prefix).  With stop_on_miss=False
    the schedule continues, tardy jobs keeping their original deadline
    priority, and only the first miss is recorded.
    """
    if horizon is None:
        horizon = hyperperiod(ts)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if horizon > HORIZON_GUARD:
        raise HorizonOverflowError(f"horizon {horizon} exceeds guard {HORIZON_GUARD}")

    active: list[Job] = []
    slots: list[SlotAllocation] = []
    first_miss: Optional[tuple[int, int]] = None

    for now in range(horizon):
        for t in ts.tasks:
            if now % t.period == 0:
                active.append(
                    Job(t.index, now, now + t.deadline, t.width, t.wcet)
                )
        miss = _earliest_miss(active, now)
        if miss is not None and first_miss is None:
            first_miss = miss
            if stop_on_miss:
                return ScheduleTrace(horizon, tuple(slots), first_miss)

        ready = sorted(active, key=lambda j: (j.deadline, j.task_index, j.release))
        allocation: list[tuple[int, tuple[int, ...]]] = []
        free = list(range(ts.processors))
        for job in ready:
            if job.width <= len(free):
                taken = tuple(free[: job.width])
                del free[: job.width]
                allocation.append((job.task_index, taken))
                job.remaining -= 1
        slots.append(tuple(allocation))
        active = [j for j in active if j.remaining > 0]

    if first_miss is None:
        first_miss = _earliest_miss(active, horizon)
    return ScheduleTrace(horizon, tuple(slots), first_miss)


def check_no_miss(ts: TaskSystem) -> bool:
    """True iff one hyperperiod of the synchronous scenario has no miss.

    False proves the system is not Gang EDF schedulable; True is only the
    absence of a counterexample in this particular scenario.
    """
    return simulate_synchronous(ts).first_miss is None


def _earliest_miss(active: list[Job], now: int) -> Optional[tuple[int, int]]:
    missed = [j for j in active if j.deadline <= now]
    if not missed:
        return None
    worst = min(missed, key=lambda j: (j.deadline, j.task_index))
    return (worst.task_index, worst.deadline)
