"""Cell grids of the reference simulation tables."""

from __future__ import annotations

from itertools import product
from typing import Any, Callable, Dict, List, Sequence

from .const import ESTIMATOR_KERNEL, ESTIMATOR_PROJECTION
from .evaluation import RiskConfig
from .exceptions import UsageError
from .sampling import ExampleId

TABLE_ETAS = (-0.2, 0.5, 1.0, 2.0, 3.0)
TABLE_SIZES = (250, 500, 1000)
SINGLE_POINT = (0.5,)
THREE_POINTS = (0.0, 0.36, 1.0)


def _cells(
    example: ExampleId,
    estimator: str,
    points: Sequence[float],
    fx_modes: Sequence[bool],
    overrides: Dict[str, Any],
) -> List[RiskConfig]:
    """Rows in table order: f_X mode, then n, then x, then eta."""
    return [
        RiskConfig(example=example, estimator=estimator, x=x, n=n, eta=eta, fx_known=fx_known, **overrides)
        for fx_known, n, x, eta in product(fx_modes, TABLE_SIZES, points, TABLE_ETAS)
    ]


def _preset(example: ExampleId, estimator: str, points: Sequence[float], both_fx: bool):
    fx_modes = (True, False) if both_fx else (False,)

    def build(**overrides: Any) -> List[RiskConfig]:
        return _cells(example, estimator, points, fx_modes, overrides)

    return build


PRESETS: Dict[str, Callable[..., List[RiskConfig]]] = {
    "table1": _preset(ExampleId.EX1, ESTIMATOR_KERNEL, SINGLE_POINT, both_fx=True),
    "table2": _preset(ExampleId.EX1, ESTIMATOR_PROJECTION, SINGLE_POINT, both_fx=False),
    "table3": _preset(ExampleId.EX2, ESTIMATOR_KERNEL, SINGLE_POINT, both_fx=True),
    "table4": _preset(ExampleId.EX2, ESTIMATOR_PROJECTION, SINGLE_POINT, both_fx=False),
    "table5": _preset(ExampleId.EX3, ESTIMATOR_KERNEL, THREE_POINTS, both_fx=False),
    "table6": _preset(ExampleId.EX3, ESTIMATOR_PROJECTION, THREE_POINTS, both_fx=False),
    "table7": _preset(ExampleId.EX4, ESTIMATOR_KERNEL, THREE_POINTS, both_fx=False),
    "table8": _preset(ExampleId.EX4, ESTIMATOR_PROJECTION, THREE_POINTS, both_fx=False),
}


def preset_cells(name: str, **overrides: Any) -> List[RiskConfig]:
    """Cells of a named preset; overrides apply to every cell (e.g. replications)."""
    try:
        builder = PRESETS[name.lower()]
    except KeyError as err:
        raise UsageError(f"Unknown preset {name!r}; expected one of {', '.join(sorted(PRESETS))}") from err
    return builder(**overrides)
