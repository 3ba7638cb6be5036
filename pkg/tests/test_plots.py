"""SVG rendering: structural checks plus byte-determinism. The renderer is
hand-rolled specifically so identical inputs give identical bytes."""

import numpy as np
import pytest

from bsmix.plots import curve_svg, scatter_svg
from bsmix.toy_diffusion import GaussianMixtureConcept


def _concepts():
    return (
        GaussianMixtureConcept(
            weights=[1.0], means=[[-2.0, 0.0]], covariances=0.25 * np.eye(2), label="left"
        ),
        GaussianMixtureConcept(
            weights=[1.0], means=[[2.0, 0.0]], covariances=0.25 * np.eye(2), label="right"
        ),
    )


class TestScatter:
    def test_well_formed(self):
        rng = np.random.default_rng(0)
        svg = scatter_svg(rng.standard_normal((20, 2)), _concepts(), title="final samples")
        assert svg.startswith("<?xml")
        assert svg.rstrip().endswith("</svg>")
        assert svg.count("<circle") == 20
        # 1-sigma and 2-sigma ellipse per component
        assert svg.count("<ellipse") == 4
        assert "left" in svg and "right" in svg and "final samples" in svg

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((10, 2))
        assert scatter_svg(pts, _concepts(), title="t") == scatter_svg(
            pts, _concepts(), title="t"
        )

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            scatter_svg(np.zeros((5, 3)), _concepts(), title="t")


class TestCurve:
    def test_well_formed(self):
        xs = [0.0, 5.0, 10.0]
        ys = [0.1, 0.3, 0.2]
        svg = curve_svg(xs, ys, xlabel="strike", ylabel="balance", title="sweep")
        assert svg.startswith("<?xml")
        assert "<polyline" in svg
        assert svg.count("<circle") == 3
        assert "strike" in svg and "balance" in svg

    def test_deterministic_bytes(self):
        xs, ys = [0.0, 1.0], [0.5, 0.25]
        a = curve_svg(xs, ys, xlabel="x", ylabel="y", title="t")
        assert a == curve_svg(xs, ys, xlabel="x", ylabel="y", title="t")

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            curve_svg([0.0, 1.0], [0.5], xlabel="x", ylabel="y", title="t")
