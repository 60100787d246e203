"""Hypothesis strategies shared by the property tests."""

import hypothesis.strategies as st

from chuk_mcp_acs.models import GridFrame


@st.composite
def frames(draw, max_side: int = 8, max_count: int = 4, min_units: int = 1) -> GridFrame:
    """Random frames with small nonnegative counts."""
    width = draw(st.integers(1, max_side))
    height = draw(st.integers(1, max_side).filter(lambda h: width * h >= min_units))
    counts = draw(
        st.lists(st.integers(0, max_count), min_size=width * height, max_size=width * height)
    )
    return GridFrame(width=width, height=height, counts=tuple(counts))


@st.composite
def small_frames(draw, max_units: int = 12, max_count: int = 5) -> GridFrame:
    """Frames with 3 <= N <= max_units, small enough to enumerate every sample."""
    width = draw(st.integers(1, max_units))
    height = draw(st.integers(1, max_units // width))
    if width * height < 3:
        width, height = 3, 1
    counts = draw(
        st.lists(st.integers(0, max_count), min_size=width * height, max_size=width * height)
    )
    return GridFrame(width=width, height=height, counts=tuple(counts))
