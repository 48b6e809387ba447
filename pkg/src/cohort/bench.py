"""Arbitration scaling benchmark.

Measures per-turn coordination overhead (scoring bookkeeping + selection +
dispatch, adapter and execution time excluded) on synthetic N-agent rosters.
The scorer returns an empty table so every turn falls back to argmax and
dispatches exactly one agent; what remains is the coordinator's own cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .adapters import Purpose, ScriptRule
from .core import AgentProfile
from .session import BackendConfig, SessionConfig, create_session
from .world import AgentBody, Bounds, Pose2D, WorldState

PLAN_REPLY = '{"actions":[{"kind":"speak","params":{"text":"Acknowledged.","volume":0.7}}]}'
SCORE_REPLY = '{"scores":{}}'


@dataclass(frozen=True)
class BenchRow:
    agents: int
    turns: int
    mean_ms: float
    p95_ms: float

    def to_dict(self) -> dict:
        return {
            "agents": self.agents,
            "turns": self.turns,
            "mean_ms": self.mean_ms,
            "p95_ms": self.p95_ms,
        }


def linear_fit(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """Least-squares line through (xs, ys): (slope, intercept, r_squared)."""
    n = len(xs)
    if n < 2 or len(ys) != n:
        raise ValueError("need at least two points with matching lengths")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    var_x = sum((x - mean_x) ** 2 for x in xs)
    if var_x == 0:
        raise ValueError("x values are all identical")
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = cov / var_x
    intercept = mean_y - slope * mean_x
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r_squared


def bench_config(agents: int) -> SessionConfig:
    """Synthetic roster on a grid, no entities, in-memory log only."""
    if agents < 2:
        raise ValueError(f"bench needs at least 2 agents, got {agents}")
    side = math.ceil(math.sqrt(agents))
    roster = tuple(
        AgentProfile(
            id=f"agent_{i:03d}",
            display_name=f"Agent {i}",
            persona="A benchmark agent.",
            registration_index=i,
        )
        for i in range(agents)
    )
    bodies = {
        p.id: AgentBody(pose=Pose2D(1.0 + (i % side), 1.0 + (i // side), 0.0))
        for i, p in enumerate(roster)
    }
    world = WorldState(
        bounds=Bounds(0.0, 0.0, side + 2.0, side + 2.0),
        agents=bodies,
        human=Pose2D(0.5, 0.5),
    )
    rules = (
        ScriptRule(Purpose.PLAN, "*", PLAN_REPLY),
        ScriptRule(Purpose.SCORE, "*", SCORE_REPLY),
    )
    return SessionConfig(
        roster=roster,
        world=world,
        backend=BackendConfig(kind="scripted", rules=rules),
        persist_log=False,
        session_id=f"bench-{agents:03d}",
    )


def bench(agents: int, turns: int, warmup: int = 3) -> BenchRow:
    """Run ``turns`` measured turns on an N-agent roster and summarize the
    coordination overhead per turn."""
    if turns < 1:
        raise ValueError(f"bench needs at least 1 turn, got {turns}")
    session = create_session(bench_config(agents))
    try:
        for i in range(warmup):
            session.post_utterance(f"warmup {i}")
        samples_ms = []
        for i in range(turns):
            record = session.post_utterance(f"ping {i}")
            samples_ms.append(record.overhead_us / 1000.0)
    finally:
        session.close()
    samples_ms.sort()
    mean_ms = sum(samples_ms) / len(samples_ms)
    p95_index = max(0, math.ceil(0.95 * len(samples_ms)) - 1)
    return BenchRow(agents=agents, turns=turns, mean_ms=mean_ms, p95_ms=samples_ms[p95_index])


def bench_sweep(agent_counts: list[int], turns: int) -> list[BenchRow]:
    return [bench(n, turns) for n in agent_counts]
