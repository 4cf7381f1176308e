"""Plot palette for means and ECDF figures.

Each initial datum gets a fixed color and line style; unknown names fall
back to a deterministic cycle so repeated renders match.
"""

from typing import Dict, Tuple

from matplotlib.colors import to_hex

# Simple style definitions: (RGB, matplotlib line style)
INITIAL_STYLES: Dict[str, Tuple[Tuple[int, int, int], str]] = {
    "xi1": ((220, 20, 60), ":"),  # Red, dotted
    "xi2": ((30, 80, 220), "-."),  # Blue, dash-dot
    "xi3": ((34, 139, 34), "-"),  # Green, solid
}

FALLBACK_STYLES = [
    ((128, 0, 128), "--"),  # Purple
    ((255, 140, 0), "-"),  # Orange
    ((0, 139, 139), ":"),  # Teal
    ((90, 90, 90), "-."),  # Gray
]


def to_unit_rgb(color: Tuple[int, int, int]) -> Tuple[float, float, float]:
    """Convert 0-255 RGB to the 0-1 floats matplotlib expects."""
    r, g, b = color
    return (r / 255.0, g / 255.0, b / 255.0)


def get_initial_style(name: str, position: int = 0) -> Tuple[str, str]:
    """Get hex color and line style for an initial datum.

    Args:
        name: Initial-datum name as written in the CSV tables
        position: Order of the series in its panel, used for unknown names

    Returns:
        (hex color, line style)
    """
    color, style = INITIAL_STYLES.get(name, FALLBACK_STYLES[position % len(FALLBACK_STYLES)])
    return to_hex(to_unit_rgb(color)), style
