"""Built-in 5x7 bitmap font used to paint house-number plates and street
signs onto synthetic panoramas. Row strings run top to bottom; '1' is ink."""

from __future__ import annotations

import numpy as np

GLYPH_COLS = 5
GLYPH_ROWS = 7

GLYPHS: dict[str, tuple[str, ...]] = {
    "0": ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    "1": ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    "2": ("01110", "10001", "00001", "00010", "00100", "01000", "11111"),
    "3": ("11111", "00010", "00100", "00010", "00001", "10001", "01110"),
    "4": ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    "5": ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    "6": ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    "7": ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    "8": ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    "9": ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
    "A": ("01110", "10001", "10001", "11111", "10001", "10001", "10001"),
    "B": ("11110", "10001", "10001", "11110", "10001", "10001", "11110"),
    "C": ("01110", "10001", "10000", "10000", "10000", "10001", "01110"),
    "D": ("11100", "10010", "10001", "10001", "10001", "10010", "11100"),
    "E": ("11111", "10000", "10000", "11110", "10000", "10000", "11111"),
    "F": ("11111", "10000", "10000", "11110", "10000", "10000", "10000"),
    "G": ("01110", "10001", "10000", "10111", "10001", "10001", "01111"),
    "H": ("10001", "10001", "10001", "11111", "10001", "10001", "10001"),
    "I": ("01110", "00100", "00100", "00100", "00100", "00100", "01110"),
    "J": ("00111", "00010", "00010", "00010", "00010", "10010", "01100"),
    "K": ("10001", "10010", "10100", "11000", "10100", "10010", "10001"),
    "L": ("10000", "10000", "10000", "10000", "10000", "10000", "11111"),
    "M": ("10001", "11011", "10101", "10101", "10001", "10001", "10001"),
    "N": ("10001", "10001", "11001", "10101", "10011", "10001", "10001"),
    "O": ("01110", "10001", "10001", "10001", "10001", "10001", "01110"),
    "P": ("11110", "10001", "10001", "11110", "10000", "10000", "10000"),
    "Q": ("01110", "10001", "10001", "10001", "10101", "10010", "01101"),
    "R": ("11110", "10001", "10001", "11110", "10100", "10010", "10001"),
    "S": ("01111", "10000", "10000", "01110", "00001", "00001", "11110"),
    "T": ("11111", "00100", "00100", "00100", "00100", "00100", "00100"),
    "U": ("10001", "10001", "10001", "10001", "10001", "10001", "01110"),
    "V": ("10001", "10001", "10001", "10001", "10001", "01010", "00100"),
    "W": ("10001", "10001", "10001", "10101", "10101", "11011", "10001"),
    "X": ("10001", "10001", "01010", "00100", "01010", "10001", "10001"),
    "Y": ("10001", "10001", "01010", "00100", "00100", "00100", "00100"),
    "Z": ("11111", "00001", "00010", "00100", "01000", "10000", "11111"),
    " ": ("00000", "00000", "00000", "00000", "00000", "00000", "00000"),
}


def glyph_array(ch: str) -> np.ndarray:
    """(7, 5) boolean ink mask for one character; unknown chars render blank."""
    rows = GLYPHS.get(ch.upper(), GLYPHS[" "])
    return np.array([[c == "1" for c in row] for row in rows], dtype=bool)


def render_text(
    text: str,
    scale: int = 3,
    ink: tuple[int, int, int] = (15, 15, 20),
    background: tuple[int, int, int] = (246, 246, 240),
    gap_cols: int = 1,
) -> np.ndarray:
    """Rasterize `text` into an (H, W, 3) uint8 image, one glyph per char."""
    if not text:
        raise ValueError("cannot render empty text")
    chars = [glyph_array(c) for c in text]
    gap = np.zeros((GLYPH_ROWS, gap_cols), dtype=bool)
    cells = []
    for i, arr in enumerate(chars):
        cells.append(arr)
        if i != len(chars) - 1:
            cells.append(gap)
    mask = np.concatenate(cells, axis=1)
    mask = np.kron(mask, np.ones((scale, scale), dtype=bool))
    img = np.empty((*mask.shape, 3), dtype=np.uint8)
    img[:] = np.array(background, dtype=np.uint8)
    img[mask] = np.array(ink, dtype=np.uint8)
    return img
