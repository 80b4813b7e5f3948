"""Enumeration budget shared by brute-force evaluation and table construction."""

import logging
import threading
from collections import defaultdict

from boxmso.core.errors import BudgetExceededError

logger = logging.getLogger(__name__)


class EnumerationBudget:
    """
    Counts work units per key and refuses to go past a hard limit.

    The oracle charges one unit per enumerated assignment, the table
    builder one unit per stored state.
    """

    def __init__(self, limit: int = 2**20):
        self.limit = limit
        self._spent: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()

    def charge(self, key: str, amount: int = 1) -> None:
        """Spend units, raising once the limit is crossed."""
        with self._lock:
            self._spent[key] += amount
            spent = self._spent[key]
        if spent > self.limit:
            logger.warning(f"Budget exhausted for {key}: {spent} > {self.limit}")
            raise BudgetExceededError(
                f"{key} needs more than {self.limit} units", key=key, limit=self.limit
            )

    def ensure(self, key: str, needed: int) -> None:
        """Refuse up front when a known amount of work will not fit."""
        if needed > self.limit:
            logger.warning(f"Refusing {key}: {needed} units requested, limit {self.limit}")
            raise BudgetExceededError(
                f"{key} would need {needed} units, limit is {self.limit}",
                key=key,
                limit=self.limit,
            )

    def spent(self, key: str) -> int:
        with self._lock:
            return self._spent[key]

