"""Selection traces recorded by the Goldenshluger-Lepski rules."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Generic, Hashable, List, Optional, Sequence, Tuple, TypeVar

from .exceptions import ConfigurationError

_LOGGER = logging.getLogger(__name__)

CandidateT = TypeVar("CandidateT", bound=Hashable)


@dataclass(frozen=True)
class SelectionRecord(Generic[CandidateT]):
    """One candidate of a selection: its penalty, its A value and the objective."""

    candidate: CandidateT
    sigma: float
    A: float
    objective: float
    eligible: bool = True

    def as_dict(self) -> Dict[str, Any]:
        """Plain representation used by the trace export."""
        candidate = self.candidate
        if hasattr(candidate, "as_dict"):
            candidate = candidate.as_dict()
        return {
            "candidate": candidate,
            "sigma": self.sigma,
            "A": self.A,
            "objective": self.objective,
            "eligible": self.eligible,
        }


@dataclass(frozen=True)
class SelectionTrace(Generic[CandidateT]):
    """Every candidate record plus the chosen candidate."""

    records: Tuple[SelectionRecord[CandidateT], ...]
    chosen: CandidateT

    @property
    def candidates(self) -> List[CandidateT]:
        """Candidates in grid order."""
        return [record.candidate for record in self.records]

    def record_for(self, candidate: CandidateT) -> SelectionRecord[CandidateT]:
        """Return the record of a candidate."""
        for record in self.records:
            if record.candidate == candidate:
                return record
        raise KeyError(candidate)

    def as_dict(self) -> Dict[str, Any]:
        """Plain representation used by the trace export."""
        chosen = self.chosen
        if hasattr(chosen, "as_dict"):
            chosen = chosen.as_dict()
        return {
            "chosen": chosen,
            "records": [record.as_dict() for record in self.records],
        }


def select_minimum(
    candidates: Sequence[CandidateT],
    sigmas: Sequence[float],
    a_values: Sequence[float],
    tie_key: Callable[[CandidateT], Any],
    eligible: Optional[Callable[[CandidateT], bool]] = None,
) -> SelectionTrace[CandidateT]:
    """Build a trace and pick argmin{A + sigma}.

    Exact ties on the objective are broken by ``tie_key`` (smallest wins).
    When ``eligible`` is given, the argmin runs over the eligible candidates
    only, unless none is eligible.
    """
    records = tuple(
        SelectionRecord(
            candidate,
            float(sigma),
            float(a),
            float(a) + float(sigma),
            True if eligible is None else bool(eligible(candidate)),
        )
        for candidate, sigma, a in zip(candidates, sigmas, a_values)
    )
    if not records:
        raise ConfigurationError("Cannot select from an empty candidate set")
    pool = [record for record in records if record.eligible]
    if not pool:
        _LOGGER.warning("No eligible candidate among %d, selecting over all of them", len(records))
        pool = list(records)
    best = min(pool, key=lambda record: (record.objective, tie_key(record.candidate)))
    _LOGGER.debug(
        "Selected %s among %d candidates (objective %.6g)",
        best.candidate,
        len(records),
        best.objective,
    )
    return SelectionTrace(records=records, chosen=best.candidate)
