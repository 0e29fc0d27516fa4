"""Per-replication result records shared by the metrics and harness layers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class MethodResult:
    """One estimator's output for the target coordinate in one replication.

    ``ci`` maps alpha to (lower, upper) for the target coordinate.
    ``std_pivot`` is (estimate - truth) / stderr, NaN when no stderr exists.
    """

    estimate: float
    stderr: float
    ci: dict[float, tuple[float, float]] = field(default_factory=dict)
    scaled_mse: float = float("nan")
    block_scaled_mse: float = float("nan")
    std_pivot: float = float("nan")
    sigma_hat: float = float("nan")
    runtime_ms: float = float("nan")


@dataclass
class ReplicationRecord:
    """All estimator outputs for one replication of one experiment cell."""

    rep: int
    k: int
    target_coord: int
    target_true: float
    methods: dict[str, MethodResult] = field(default_factory=dict)
