"""Edge-blurred image preparation for the adversarial edge term.

Comics with softened edges form the extra negative class the discriminator
learns to reject, pushing the generator toward crisp outlines.
"""

import cv2
import numpy as np

CANNY_LOW = 100
CANNY_HIGH = 200
DILATE_KERNEL = 5
BLUR_KERNEL = 7
BLUR_SIGMA = 3.0


def edge_blur(comic: np.ndarray) -> np.ndarray:
    """Gaussian-blur only the dilated edge region of an image.

    Accepts float RGB in [0,1] or uint8; returns the same dtype. Solid
    images have no edges and come back unchanged. Not idempotent: a second
    pass may pick up the softened edges it just created.
    """
    if comic.dtype == np.uint8:
        u8 = comic
    else:
        u8 = np.clip(comic * 255.0, 0, 255).astype(np.uint8)

    gray = cv2.cvtColor(u8, cv2.COLOR_RGB2GRAY)
    edges = cv2.Canny(gray, CANNY_LOW, CANNY_HIGH)
    if not edges.any():
        return comic.copy()
    kernel = np.ones((DILATE_KERNEL, DILATE_KERNEL), np.uint8)
    region = cv2.dilate(edges, kernel) > 0

    # blur the original array so untouched pixels keep their exact values
    blurred = cv2.GaussianBlur(comic, (BLUR_KERNEL, BLUR_KERNEL), BLUR_SIGMA)
    out = comic.copy()
    out[region] = blurred[region]
    return out
