"""
Recovery algorithm plugin API.

Plugins must expose a callable `get_plugin()` that returns an instance with:

- attribute `name: str` (the CLI / harness tag, e.g. "homotopy")
- attribute `seeded: bool` (whether `ctx.seed` changes the result)
- attribute `description: str` (one line for option lists and the viewer)
- `run(T, ctx) -> RecoveryTrace`

`ctx` is a `tensorpca.algorithms.RunContext` providing:
- `ctx.seed`, `ctx.max_iter`, `ctx.tol`
- `ctx.v`: the true signal when known; traces then carry correlations
- `ctx.tau_hat`: penalty coefficient for the smoothed objectives
- `ctx.m`, `ctx.streaming`: noise-injection settings
- `ctx.schedule`, `ctx.t_phase`, `ctx.ascent`: homotopy settings
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

from ..algorithms import RecoveryTrace, RunContext
from ..tensor_core import Tensor3


@runtime_checkable
class RecoveryPlugin(Protocol):
    name: str
    seeded: bool
    description: str

    def run(self, T: Tensor3, ctx: RunContext) -> RecoveryTrace:
        ...
