"""NumPy batch bindings for the reasonkit kernel and dataset generator.

Stateless adapters only: every number is produced by the core package.
Call self_test() after installation to confirm parity with the shipped
golden fixture.
"""

__version__ = "0.1.0"

from .batch import (
    BatchAdvantages,
    BatchParses,
    BatchRewards,
    BridgeBatch,
    BridgeShapeError,
    compute_advantages_batch,
    estimate_bounds_batch,
    generate_records,
    parse_response_batch,
    task_reward_batch,
)
from .fixture import PARITY_ATOL, ParityError, load_fixture, self_test

__all__ = [
    "__version__",
    "BatchAdvantages", "BatchParses", "BatchRewards", "BridgeBatch",
    "BridgeShapeError", "compute_advantages_batch", "estimate_bounds_batch",
    "generate_records", "parse_response_batch", "task_reward_batch",
    "PARITY_ATOL", "ParityError", "load_fixture", "self_test",
]
