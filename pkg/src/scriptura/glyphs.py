"""Synthetic letter templates for corpus generation and training fixtures.

Glyphs are drawn on a 28-row canvas: ascenders start at row 2, the
x-height band spans rows 8 to 19, descenders reach row 26. Every
template keeps one blank column on each side so neighboring letters can
overlap slightly without always fusing. Letters with two written forms
(round and tall d, short and long s) get one template per form, matching
the classifier's shape classes.
"""

from __future__ import annotations

import numpy as np

from .classifier import NON_CHARACTER, SymbolAlphabet

__all__ = ["GLYPH_HEIGHT", "glyph_bank", "shapes_for_char"]

GLYPH_HEIGHT = 28
ASC_TOP = 2
X_TOP = 8
X_BOT = 19
DESC_BOT = 26


def _canvas(width: int) -> np.ndarray:
    return np.zeros((GLYPH_HEIGHT, width), dtype=np.uint8)


def _vline(img, x, y0, y1, t=2):
    img[y0 : y1 + 1, x : x + t] = 1


def _hline(img, y, x0, x1, t=2):
    img[y : y + t, x0 : x1 + 1] = 1


def _line(img, x0, y0, x1, y1, t=2):
    n = max(abs(x1 - x0), abs(y1 - y0)) + 1
    xs = np.rint(np.linspace(x0, x1, n)).astype(int)
    ys = np.rint(np.linspace(y0, y1, n)).astype(int)
    h, w = img.shape
    for dy in range(t):
        for dx in range(t):
            cy = np.clip(ys + dy, 0, h - 1)
            cx = np.clip(xs + dx, 0, w - 1)
            img[cy, cx] = 1


def _ring(img, cx, cy, rx, ry, band=0.30):
    h, w = img.shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    rr = np.sqrt(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2)
    img[np.abs(rr - 1.0) <= band] = 1


_BOWL_CY = (X_TOP + X_BOT) / 2.0
_BOWL_RX = 3.2
_BOWL_RY = 4.4


def _bowl(width: int, cx: float = 4.8) -> np.ndarray:
    img = _canvas(width)
    _ring(img, cx, _BOWL_CY, _BOWL_RX, _BOWL_RY)
    return img


def _glyph_a():
    img = _bowl(12)
    _vline(img, 9, X_TOP, X_BOT)
    return img


def _glyph_b():
    img = _canvas(12)
    _vline(img, 1, ASC_TOP, X_BOT)
    _ring(img, 6.7, _BOWL_CY, _BOWL_RX, _BOWL_RY)
    return img


def _glyph_c():
    img = _bowl(10)
    # Open the right side across the waist.
    img[X_TOP + 3 : X_BOT - 2, 7:] = 0
    return img


def _glyph_d():
    img = _bowl(12)
    _vline(img, 9, X_TOP - 4, X_BOT)
    return img


def _glyph_d_tall():
    img = _bowl(12)
    _vline(img, 9, ASC_TOP, X_BOT)
    _line(img, 9, ASC_TOP, 5, ASC_TOP + 3)
    return img


def _glyph_e():
    img = _bowl(10)
    img[X_TOP + 4 : X_BOT - 2, 7:] = 0
    _hline(img, int(_BOWL_CY) - 1, 2, 8)
    return img


def _glyph_f():
    img = _canvas(10)
    _vline(img, 3, ASC_TOP, X_BOT)
    _hline(img, ASC_TOP, 3, 8)
    _hline(img, X_TOP, 1, 7)
    return img


def _glyph_g():
    img = _bowl(12)
    _vline(img, 9, X_TOP, DESC_BOT - 1)
    _hline(img, DESC_BOT - 2, 3, 9)
    return img


def _glyph_o():
    return _bowl(10)


def _glyph_p():
    img = _canvas(12)
    _vline(img, 1, X_TOP, DESC_BOT)
    _ring(img, 6.7, _BOWL_CY, _BOWL_RX, _BOWL_RY)
    return img


def _glyph_q():
    img = _bowl(12)
    _vline(img, 9, X_TOP, DESC_BOT)
    return img


def _glyph_h():
    img = _canvas(11)
    _vline(img, 1, ASC_TOP, X_BOT)
    _hline(img, X_TOP, 1, 9)
    _vline(img, 8, X_TOP, X_BOT)
    return img


def _glyph_i():
    img = _canvas(6)
    _vline(img, 2, X_TOP, X_BOT)
    return img


def _glyph_l():
    img = _canvas(6)
    _vline(img, 2, ASC_TOP, X_BOT)
    return img


def _glyph_m():
    img = _canvas(16)
    _hline(img, X_TOP, 1, 14)
    _vline(img, 1, X_TOP, X_BOT)
    _vline(img, 7, X_TOP, X_BOT)
    _vline(img, 13, X_TOP, X_BOT)
    return img


def _glyph_n():
    img = _canvas(11)
    _hline(img, X_TOP, 1, 9)
    _vline(img, 1, X_TOP, X_BOT)
    _vline(img, 8, X_TOP, X_BOT)
    return img


def _glyph_r():
    img = _canvas(9)
    _vline(img, 1, X_TOP, X_BOT)
    _hline(img, X_TOP, 1, 7)
    _vline(img, 6, X_TOP, X_TOP + 3)
    return img


def _glyph_s():
    img = _canvas(11)
    _hline(img, X_TOP, 2, 9)
    _vline(img, 2, X_TOP, int(_BOWL_CY))
    _hline(img, int(_BOWL_CY), 2, 8)
    _vline(img, 7, int(_BOWL_CY), X_BOT)
    _hline(img, X_BOT - 1, 1, 8)
    return img


def _glyph_s_long():
    img = _canvas(9)
    _vline(img, 3, ASC_TOP, DESC_BOT - 2)
    _hline(img, ASC_TOP, 3, 7)
    return img


def _glyph_t():
    img = _canvas(10)
    _vline(img, 3, X_TOP - 2, X_BOT)
    _hline(img, X_TOP, 1, 8)
    return img


def _glyph_u():
    img = _canvas(12)
    _vline(img, 1, X_TOP, X_BOT - 1)
    _vline(img, 9, X_TOP, X_BOT - 1)
    _hline(img, X_BOT - 1, 1, 10)
    return img


def _glyph_x():
    img = _canvas(11)
    _line(img, 1, X_TOP, 8, X_BOT)
    _line(img, 8, X_TOP, 1, X_BOT)
    return img


_BUILDERS = {
    "a": _glyph_a,
    "b": _glyph_b,
    "c": _glyph_c,
    "d": _glyph_d,
    "d-tall": _glyph_d_tall,
    "e": _glyph_e,
    "f": _glyph_f,
    "g": _glyph_g,
    "h": _glyph_h,
    "i": _glyph_i,
    "l": _glyph_l,
    "m": _glyph_m,
    "n": _glyph_n,
    "o": _glyph_o,
    "p": _glyph_p,
    "q": _glyph_q,
    "r": _glyph_r,
    "s": _glyph_s,
    "s-long": _glyph_s_long,
    "t": _glyph_t,
    "u": _glyph_u,
    "x": _glyph_x,
}


def _trim_margins(glyph: np.ndarray) -> np.ndarray:
    """Exactly one blank column on each side, full canvas height kept."""
    cols = np.flatnonzero(glyph.any(axis=0))
    trimmed = glyph[:, cols[0] : cols[-1] + 1]
    pad = np.zeros((glyph.shape[0], 1), dtype=glyph.dtype)
    return np.hstack([pad, trimmed, pad])


def glyph_bank(alphabet: SymbolAlphabet | None = None) -> dict[str, np.ndarray]:
    """Template per shape class name (the non-character class has none)."""
    alphabet = alphabet if alphabet is not None else SymbolAlphabet.default()
    bank = {}
    for name in alphabet.names:
        if name == NON_CHARACTER:
            continue
        if name not in _BUILDERS:
            raise KeyError(f"no template for class {name!r}")
        bank[name] = _trim_margins(_BUILDERS[name]())
    return bank


def shapes_for_char(alphabet: SymbolAlphabet, char: str) -> list[int]:
    """Class indices whose transcription character is ``char``."""
    out = [i for i, c in enumerate(alphabet.chars) if c == char]
    if not out:
        raise KeyError(f"no shape class writes {char!r}")
    return out
