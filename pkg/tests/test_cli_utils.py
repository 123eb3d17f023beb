"""
Tests for the blurreg CLI utilities.
"""
import json
from fractions import Fraction

import pytest
from rich.table import Table

from blurreg.cli.utils import (
    create_table,
    ensure_directory,
    format_cell,
    print_checks,
    print_error,
    print_info,
    print_json,
    print_success,
    print_warning,
    to_json,
)


class TestCLIUtils:
    """Test suite for CLI utilities."""

    def test_print_functions(self, capsys):
        """Test the print utility functions."""
        print_error("Test error")
        captured = capsys.readouterr()
        assert "Test error" in captured.err

        print_success("Test success")
        captured = capsys.readouterr()
        assert "Test success" in captured.out

        print_warning("Test warning")
        captured = capsys.readouterr()
        assert "Test warning" in captured.out

        print_info("Test info")
        captured = capsys.readouterr()
        assert "Test info" in captured.out

    def test_to_json_serializes_rationals(self):
        """Fractions become "num/den" strings and keys are sorted."""
        text = to_json({"b": Fraction(3, 512), "a": Fraction(144, 256)})

        assert json.loads(text) == {"a": "144/256", "b": "3/512"}
        assert text.index('"a"') < text.index('"b"')

    def test_to_json_rejects_unknown_types(self):
        with pytest.raises(TypeError):
            to_json({"x": object()})

    def test_print_json(self, capsys):
        """Test the print_json function."""
        print_json({"key": "value", "lag": -1}, title="Report")
        captured = capsys.readouterr()
        assert "key" in captured.out
        assert "Report" in captured.out

    def test_create_table(self, capsys):
        """Test the create_table function."""
        table = create_table(
            "Sequences",
            [{"header": "i"}, {"header": "γ1", "justify": "right"}],
            [[0, Fraction(0)], [1, Fraction(144, 256)]],
        )
        captured = capsys.readouterr()

        assert isinstance(table, Table)
        assert "Sequences" in captured.out
        assert "144/256" in captured.out

    @pytest.mark.parametrize(
        "value, text",
        [
            (None, "-"),
            (Fraction(16, 256), "16/256"),
            (Fraction(682, 2483), "682/2483"),
            (7.70912345, "7.70912"),
            (float("inf"), "inf"),
            (-5, "-5"),
        ],
    )
    def test_format_cell(self, value, text):
        assert format_cell(value) == text

    def test_print_checks(self, capsys):
        print_checks({"gamma2": True, "gamma1": False})
        out = capsys.readouterr().out

        assert out.index("gamma1") < out.index("gamma2")
        assert "FAIL" in out and "pass" in out

    def test_ensure_directory(self, tmp_path):
        """Test the ensure_directory function."""
        test_dir = tmp_path / "reports" / "run1"

        result = ensure_directory(test_dir)

        assert result == test_dir.resolve()
        assert test_dir.is_dir()
        assert ensure_directory(test_dir) == result


if __name__ == "__main__":
    pytest.main(["-v", __file__])
