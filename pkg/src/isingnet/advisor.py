"""Serial vs concurrent operating-mode advisor."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UsageError

PRIORITIES = ("latency", "energy")


@dataclass(frozen=True)
class AdvisorInput:
    """Decision inputs.

    Attributes:
        priority: ``"latency"`` or ``"energy"``.
        available_sync_frequency: Highest synchronization rate the interconnect sustains (Hz).
        rho_problem: Spectral radius of the coupling matrix.
        rc: Device time constant (s).
        rc_adjustable: Whether the time constant can be slowed down.
        rc_max: Largest achievable time constant when adjustable (s).
        b: Number of blocks.
    """

    priority: str
    available_sync_frequency: float
    rho_problem: float
    rc: float
    rc_adjustable: bool = False
    rc_max: float | None = None
    b: int = 2

    def __post_init__(self):
        if self.priority not in PRIORITIES:
            raise UsageError(f"priority must be one of {PRIORITIES}")
        for name in ("available_sync_frequency", "rho_problem", "rc"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.b < 1:
            raise UsageError("b must be at least 1")
        if self.rc_adjustable and (self.rc_max is None or self.rc_max <= 0):
            raise UsageError("rc_max must be positive when rc is adjustable")


@dataclass
class Advice:
    mode: str
    trace: list[str] = field(default_factory=list)

    def text(self) -> str:
        return "\n".join([*self.trace, f"decision: {self.mode}"])


def required_frequency(rho: float, rc: float) -> float:
    """Sync rate ``rho / RC`` needed to stay below one spin-flip time."""
    return rho / rc


def advise(inp: AdvisorInput) -> Advice:
    """Pick an operating mode and record every branch taken."""
    tr = [f"priority = {inp.priority}"]
    if inp.priority == "energy":
        tr.append("energy priority: serial reaches comparable energy-to-target with fewer transfers")
        return Advice("serial", tr)
    need = required_frequency(inp.rho_problem, inp.rc)
    tr.append(f"required sync frequency rho/RC = {need:.4g} Hz; available = {inp.available_sync_frequency:.4g} Hz")
    if inp.available_sync_frequency >= need:
        tr.append("available frequency meets the spin-flip heuristic")
        return Advice("concurrent", tr)
    tr.append("available frequency is below the spin-flip heuristic")
    if not inp.rc_adjustable:
        tr.append("time constant is fixed")
        return Advice("serial", tr)
    slowdown = inp.rc_max / inp.rc
    tr.append(f"slowing the device: RC'/RC = {slowdown:.4g}, B = {inp.b}")
    if slowdown >= inp.b:
        tr.append("slowdown is at least B, so serial execution is no slower")
        return Advice("serial", tr)
    need_slow = required_frequency(inp.rho_problem, inp.rc_max)
    tr.append(f"required frequency at RC' = {need_slow:.4g} Hz")
    if inp.available_sync_frequency >= need_slow:
        tr.append("slowed device meets the spin-flip heuristic")
        return Advice("concurrent", tr)
    tr.append("slowed device still needs a faster interconnect")
    return Advice("serial", tr)
