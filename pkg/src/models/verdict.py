# src/models/verdict.py
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional


class CheckMethod(Enum):
    DM = "dm"
    DIGRAPH = "digraph"
    BOTH = "both"

    def runs_dm(self) -> bool:
        return self in {CheckMethod.DM, CheckMethod.BOTH}

    def runs_digraph(self) -> bool:
        return self in {CheckMethod.DIGRAPH, CheckMethod.BOTH}


@dataclass(frozen=True)
class GsioVerdict:
    """Outcome of a GSIO check with every evaluated sub-condition and its witnesses"""

    method: CheckMethod
    dm_cond_1: Optional[bool] = None  # no B_0 in D(B(A,B,C))
    dm_cond_2: Optional[bool] = None  # no s-edge middle block in D(B'(A,B,C))
    dg_cond_1: Optional[bool] = None  # θ(X∪U, X∪Y) = n+q
    dg_cond_2: Optional[bool] = None  # every state Y-reached
    dg_cond_3: Optional[bool] = None  # Δ0 ⊆ V_ess(U,Y)
    unmatched_left: List[str] = field(default_factory=list)
    s_edge_components: List[int] = field(default_factory=list)
    theta: Optional[int] = None
    unreached_states: List[str] = field(default_factory=list)
    unreached_inputs: List[str] = field(default_factory=list)
    delta0_outside_ess: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.method.runs_dm() and (self.dm_cond_1 is None or self.dm_cond_2 is None):
            raise ValueError("DM route selected but its conditions are missing")
        if self.method.runs_digraph() and None in (self.dg_cond_1, self.dg_cond_2, self.dg_cond_3):
            raise ValueError("Digraph route selected but its conditions are missing")

    @property
    def dm_overall(self) -> Optional[bool]:
        if not self.method.runs_dm():
            return None
        return bool(self.dm_cond_1 and self.dm_cond_2)

    @property
    def digraph_overall(self) -> Optional[bool]:
        if not self.method.runs_digraph():
            return None
        return bool(self.dg_cond_1 and self.dg_cond_2 and self.dg_cond_3)

    @property
    def overall(self) -> bool:
        results = [r for r in (self.dm_overall, self.digraph_overall) if r is not None]
        return all(results)

    @property
    def routes_agree(self) -> bool:
        if self.method is not CheckMethod.BOTH:
            return True
        return self.dm_overall == self.digraph_overall

    def merge(self, other: "GsioVerdict") -> "GsioVerdict":
        """Combine a DM verdict with a digraph verdict into one BOTH verdict"""
        dm, digraph = (self, other) if self.method is CheckMethod.DM else (other, self)
        if dm.method is not CheckMethod.DM or digraph.method is not CheckMethod.DIGRAPH:
            raise ValueError("merge needs one DM verdict and one digraph verdict")
        return replace(
            digraph,
            method=CheckMethod.BOTH,
            dm_cond_1=dm.dm_cond_1,
            dm_cond_2=dm.dm_cond_2,
            unmatched_left=dm.unmatched_left,
            s_edge_components=dm.s_edge_components,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"method": self.method.value, "overall": self.overall}
        if self.method.runs_dm():
            data["dm"] = {
                "overall": self.dm_overall,
                "cond_1": self.dm_cond_1,
                "cond_2": self.dm_cond_2,
                "unmatched_left": self.unmatched_left,
                "s_edge_components": self.s_edge_components,
            }
        if self.method.runs_digraph():
            data["digraph"] = {
                "overall": self.digraph_overall,
                "cond_1": self.dg_cond_1,
                "cond_2": self.dg_cond_2,
                "cond_3": self.dg_cond_3,
                "theta": self.theta,
                "unreached_states": self.unreached_states,
                "unreached_inputs": self.unreached_inputs,
                "delta0_outside_ess": self.delta0_outside_ess,
            }
        if self.method is CheckMethod.BOTH:
            data["agree"] = self.routes_agree
        return data


@dataclass(frozen=True)
class StructObsVerdict:
    overall: bool
    matching_size: int
    n: int
    unreached_states: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "overall": self.overall,
            "matching_size": self.matching_size,
            "n": self.n,
            "unreached_states": self.unreached_states,
        }
