"""Boxplot statistics and SVG output structure."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from accentgram.errors import DataError
from accentgram.svgplot import boxplot_svg, strip_svg, tukey_stats


def test_tukey_quartiles_match_numpy():
    rng = np.random.default_rng(30)
    x = rng.standard_normal(101)
    stats = tukey_stats(x)
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    assert stats.q1 == pytest.approx(q1, abs=1e-12)
    assert stats.median == pytest.approx(med, abs=1e-12)
    assert stats.q3 == pytest.approx(q3, abs=1e-12)


def test_tukey_outlier_fixture():
    # {1, 2, 3, 4, 100}: the whisker stops at 4 and 100 is flagged
    stats = tukey_stats([1.0, 2.0, 3.0, 4.0, 100.0])
    assert stats.q1 == 2.0 and stats.q3 == 4.0 and stats.median == 3.0
    assert stats.whisker_low == 1.0
    assert stats.whisker_high == 4.0
    assert stats.outliers == (100.0,)


def test_tukey_no_outliers_whiskers_at_extremes():
    x = np.array([3.0, 1.0, 2.0, 4.0, 5.0])
    stats = tukey_stats(x)
    assert stats.whisker_low == 1.0
    assert stats.whisker_high == 5.0
    assert stats.outliers == ()


def test_tukey_outliers_sorted_both_sides():
    stats = tukey_stats([-50.0, 1.0, 2.0, 3.0, 4.0, 5.0, 60.0, 55.0])
    assert stats.outliers == (-50.0, 55.0, 60.0)


def test_tukey_rejects_degenerate_input():
    with pytest.raises(DataError):
        tukey_stats([1.0])
    with pytest.raises(DataError):
        tukey_stats([1.0, np.nan, 2.0])


def groups_fixture(seed=31):
    rng = np.random.default_rng(seed)
    return [
        ("english", rng.standard_normal(40)),
        ("mandarin", rng.standard_normal(40) + 1.0),
    ]


def test_boxplot_svg_is_valid_xml_with_labels():
    svg = boxplot_svg(groups_fixture(), title="Coefficient 5", value_label="mean value")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    text = svg
    assert "Coefficient 5" in text
    assert "english" in text and "mandarin" in text
    assert "mean value" in text


def test_boxplot_svg_deterministic():
    a = boxplot_svg(groups_fixture(), title="t", value_label="v")
    b = boxplot_svg(groups_fixture(), title="t", value_label="v")
    assert a == b


def test_boxplot_handles_constant_group():
    groups = [("a", np.full(5, 2.0)), ("b", np.full(5, 2.0))]
    svg = boxplot_svg(groups, title="flat", value_label="v")
    ET.fromstring(svg)  # degenerate span must still produce valid markup


def test_boxplot_escapes_markup_in_labels():
    groups = [("a<b>&", np.arange(5.0)), ("c", np.arange(5.0))]
    svg = boxplot_svg(groups, title='x "<&>"', value_label="v&w")
    ET.fromstring(svg)
    assert "<b>" not in svg


def test_strip_svg_structure_and_centroids():
    svg = strip_svg(
        groups_fixture(32),
        title="scores",
        value_label="canonical score",
        centroids=(-0.5, 0.5),
    )
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    circles = [el for el in root.iter() if el.tag.endswith("circle")]
    assert len(circles) == 80  # one marker per observation


def test_strip_svg_without_centroids():
    svg = strip_svg(groups_fixture(33), title="scores", value_label="score")
    ET.fromstring(svg)


def test_boxplot_rejects_empty_groups():
    with pytest.raises(DataError):
        boxplot_svg([], title="t", value_label="v")
