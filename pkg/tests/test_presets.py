"""Tests for the table presets."""

import pytest

from gl_conditional_density.const import ESTIMATOR_KERNEL, ESTIMATOR_PROJECTION
from gl_conditional_density.exceptions import UsageError
from gl_conditional_density.presets import PRESETS, preset_cells
from gl_conditional_density.sampling import ExampleId


class TestPresets:
    """Test the preset cell grids."""

    @pytest.mark.parametrize(
        "name, rows",
        [("table1", 30), ("table2", 15), ("table3", 30), ("table4", 15), ("table5", 45), ("table8", 45)],
    )
    def test_row_counts(self, name, rows):
        """Test the number of cells per preset."""
        assert len(preset_cells(name)) == rows

    def test_all_presets_build(self):
        """Test that every preset builds valid cells."""
        for name in PRESETS:
            assert preset_cells(name)

    def test_order(self):
        """Test known f_X first, then n, then eta."""
        cells = preset_cells("table1")
        assert cells[0].fx_known and not cells[-1].fx_known
        assert [cell.eta for cell in cells[:5]] == [-0.2, 0.5, 1.0, 2.0, 3.0]
        assert [cell.n for cell in cells[:15:5]] == [250, 500, 1000]
        assert all(cell.example is ExampleId.EX1 and cell.estimator == ESTIMATOR_KERNEL for cell in cells)

    def test_three_points(self):
        """Test the design points of the mixture-design tables."""
        cells = preset_cells("table6")
        assert sorted({cell.x for cell in cells}) == [0.0, 0.36, 1.0]
        assert all(cell.estimator == ESTIMATOR_PROJECTION and not cell.fx_known for cell in cells)

    def test_overrides(self):
        """Test that overrides apply to every cell."""
        cells = preset_cells("TABLE7", replications=3, base_seed=5)
        assert all(cell.replications == 3 and cell.base_seed == 5 for cell in cells)
        assert all(cell.example is ExampleId.EX4 for cell in cells)

    def test_unknown(self):
        """Test that unknown presets are a usage error."""
        with pytest.raises(UsageError):
            preset_cells("table9")
