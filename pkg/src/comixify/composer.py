"""Comic page layout: stylized keyframes into a fixed-column panel grid."""

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import EmptyInputError

CANVAS_WIDTH = 1600
BORDER_PX = 3
CELL_ASPECT = 9 / 16  # cell height / width; panels letterbox inside


@dataclass
class Layout:
    columns: int = 2
    gutter_px: int = 20
    page_panels: int = 8
    canvas_width: int = CANVAS_WIDTH


@dataclass
class ComicPage:
    image: np.ndarray
    panel_boxes: list  # (x, y, w, h) per panel, canvas coordinates
    page_index: int = 0


def _fit_letterbox(panel: np.ndarray, width: int, height: int) -> np.ndarray:
    """Aspect-preserving resize of a panel onto a white width x height cell."""
    ph, pw = panel.shape[:2]
    scale = min(width / pw, height / ph)
    nw, nh = max(1, int(round(pw * scale))), max(1, int(round(ph * scale)))
    nw, nh = min(nw, width), min(nh, height)
    resized = cv2.resize(panel, (nw, nh), interpolation=cv2.INTER_AREA)
    cell = np.full((height, width, 3), 1.0, dtype=np.float64)
    top = (height - nh) // 2
    left = (width - nw) // 2
    cell[top:top + nh, left:left + nw] = resized
    return cell


def compose(panels: list, layout: Layout = Layout()) -> list:
    """Place panels row-major into pages of a uniform grid.

    Panels are RGB float images in [0,1]. Cells get a black border and a
    letterboxed fit; gutters are white. Returns one ComicPage per
    ``page_panels`` chunk.
    """
    if not panels:
        raise EmptyInputError("no panels to compose")
    cols, gut = layout.columns, layout.gutter_px
    cell_w = (layout.canvas_width - (cols + 1) * gut) // cols
    cell_h = int(round(cell_w * CELL_ASPECT))
    canvas_w = cols * cell_w + (cols + 1) * gut

    pages = []
    for page_index, start in enumerate(range(0, len(panels), layout.page_panels)):
        chunk = panels[start:start + layout.page_panels]
        rows = math.ceil(len(chunk) / cols)
        canvas_h = rows * cell_h + (rows + 1) * gut
        canvas = np.full((canvas_h, canvas_w, 3), 1.0, dtype=np.float64)
        boxes = []
        for i, panel in enumerate(chunk):
            r, c = divmod(i, cols)
            x = gut + c * (cell_w + gut)
            y = gut + r * (cell_h + gut)
            cell = _fit_letterbox(np.asarray(panel, dtype=np.float64), cell_w, cell_h)
            cell[:BORDER_PX, :] = 0.0
            cell[-BORDER_PX:, :] = 0.0
            cell[:, :BORDER_PX] = 0.0
            cell[:, -BORDER_PX:] = 0.0
            canvas[y:y + cell_h, x:x + cell_w] = cell
            boxes.append((x, y, cell_w, cell_h))
        pages.append(ComicPage(image=canvas, panel_boxes=boxes, page_index=page_index))
    return pages


def save_page_png(page: ComicPage, path) -> None:
    """Deterministic PNG encoding of a page."""
    from PIL import Image

    arr = np.clip(page.image * 255.0, 0, 255).round().astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")
