"""
Run and batch report schemas
"""

import math
import platform
from fractions import Fraction
from importlib import metadata
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from services.errors import ValidationError


class RunRecord(BaseModel):
    seed: int
    true_atom: Optional[str] = None
    k_infinity: Optional[int] = None
    prices: List[str] = Field(default_factory=list)
    entrants: List[str] = Field(default_factory=list)
    final_price: Optional[str] = None
    theta: Optional[int] = None
    checks_enabled: bool = False
    checks_passed: Optional[bool] = None
    checks: Optional[Dict[str, Any]] = None
    balances: Dict[str, float] = Field(default_factory=dict)
    profits: Dict[str, float] = Field(default_factory=dict)
    rewards: Dict[str, str] = Field(default_factory=dict)
    mm_pnl: Optional[float] = None
    trajectory_length: Optional[float] = None
    degenerate: bool = False
    error: Optional[Dict[str, Any]] = None

    @property
    def final_price_value(self) -> Optional[float]:
        return None if self.final_price is None else float(Fraction(self.final_price))

    @property
    def price_path(self) -> List[float]:
        return [float(Fraction(p)) for p in self.prices]


def environment_fingerprint() -> Dict[str, str]:
    env = {"python": platform.python_version()}
    for package in ("numpy", "scipy", "pandas", "pydantic"):
        try:
            env[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            env[package] = "missing"
    return env


class RunReport(BaseModel):
    """Per-run records; every aggregate is recomputed from them"""
    scenario: str
    fingerprint: str
    liquidity_b: float
    environment: Dict[str, str] = Field(default_factory=environment_fingerprint)
    records: List[RunRecord] = Field(default_factory=list)

    def merge(self, other: "RunReport") -> "RunReport":
        if other.fingerprint != self.fingerprint:
            raise ValidationError(
                "cannot merge reports of different scenarios",
                {"left": self.fingerprint, "right": other.fingerprint},
            )
        by_seed = {r.seed: r for r in self.records}
        by_seed.update({r.seed: r for r in other.records})
        return self.model_copy(update={"records": [by_seed[s] for s in sorted(by_seed)]})

    @property
    def completed(self) -> List[RunRecord]:
        return [r for r in self.records if r.error is None]

    @property
    def all_checks_passed(self) -> bool:
        return all(r.checks_passed is not False for r in self.completed if r.checks_enabled)

    def summary(self) -> Dict[str, Any]:
        done = self.completed
        checked = [r for r in done if r.checks_enabled]
        pnl = [r.mm_pnl for r in done if r.mm_pnl is not None]
        return {
            "n_runs": len(self.records),
            "errors": len(self.records) - len(done),
            "degenerate": sum(r.degenerate for r in done),
            "checks_pass_rate": (sum(bool(r.checks_passed) for r in checked) / len(checked)) if checked else None,
            "mean_final_price": (sum(r.final_price_value for r in done) / len(done)) if done else None,
            "worst_mm_pnl": min(pnl) if pnl else None,
            "mm_loss_bound": self.liquidity_b * math.log(2),
        }
