"""Global protocol parameters shared by every node."""
from dataclasses import dataclass, field

from .tmdto import Mode


@dataclass(frozen=True)
class SystemParams:
    """Protocol-wide settings.

    `difficulties` maps each difficulty index j to its challenge length ell^j.
    `slot_ticks` is the round duration (Delta) and `challenge_ticks` the cost
    charged for building one challenge (delta); one chain step costs one tick.
    """

    n: int
    difficulties: dict = field(default_factory=dict)
    d: int = 0
    slot_ticks: int = 1000
    challenge_ticks: int = 10
    mode: Mode = Mode.CONSTRAINED

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "difficulties", {int(j): int(ell) for j, ell in self.difficulties.items()})
        if not 1 <= self.n <= 64:
            raise ValueError(f"n must be in [1, 64], got {self.n}")
        if not 0 <= self.d <= 64:
            raise ValueError(f"d must be in [0, 64], got {self.d}")
        if self.slot_ticks < 0 or self.challenge_ticks < 0:
            raise ValueError("tick budgets must be nonnegative")
        for j, ell in self.difficulties.items():
            if not 1 <= ell <= self.n:
                raise ValueError(f"difficulty {j}: ell={ell} outside [1, {self.n}]")

    @property
    def constrained(self):
        return self.mode is Mode.CONSTRAINED

    def ell(self, j):
        try:
            return self.difficulties[j]
        except KeyError:
            raise ValueError(f"unknown difficulty {j}") from None

    def solution_space(self, j):
        """N from the success-probability formula: 2^ell unconstrained, 2^n constrained."""
        return 1 << (self.n if self.constrained else self.ell(j))
