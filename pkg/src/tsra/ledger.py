from __future__ import annotations

from typing import Sequence

from .core import EdgeSpec

# absorbs float drift from repeated debits of fractional costs
SAFETY_TOL = 1e-9


class BudgetLedger:
    """Remaining budget per resource; never goes negative."""

    __slots__ = ("remaining",)

    def __init__(self, budgets: Sequence[float]):
        self.remaining = [float(b) for b in budgets]

    def copy(self) -> "BudgetLedger":
        return BudgetLedger(self.remaining)

    def is_safe(self, edge: EdgeSpec) -> bool:
        rem = self.remaining
        for k, a in edge.cost_items:
            if rem[k] + SAFETY_TOL < a:
                return False
        return True

    def debit(self, edge: EdgeSpec, copies: int = 1) -> None:
        rem = self.remaining
        for k, a in edge.cost_items:
            left = rem[k] - a * copies
            if left < -SAFETY_TOL * max(1, copies):
                raise ValueError(f"debit of edge {edge.id} overdraws resource {k}")
            rem[k] = left if left > 0 else 0.0

    def __repr__(self) -> str:
        return f"BudgetLedger({self.remaining!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, BudgetLedger) and self.remaining == other.remaining


def is_safe(ledger: BudgetLedger, edge: EdgeSpec) -> bool:
    return ledger.is_safe(edge)
