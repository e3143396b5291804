"""
Scoring a video against its first frame
=======================================

A textured square drifts across a static background. SSIM stays high the
whole time (above 0.9) because most of the frame is unchanged; CSIM sits
clearly lower.
"""

from copulasim import video_eval
from copulasim.harness import textured_image

background = textured_image(128, 160, 3, seed=3).pixels
square = textured_image(24, 24, 3, seed=4).pixels

frames = []
for k in range(12):
    frame = background.copy()
    x, y = 20 + 3 * k, 40 + k
    frame[y:y + 24, x:x + 24] = square
    frames.append(frame)

series = video_eval(frames, metrics=("CSIM", "SSIM"))
for i, c, s in zip(series.frame_index, series.scores["CSIM"], series.scores["SSIM"]):
    print(f"frame {i:2d}  CSIM {c:.3f}  SSIM {s:.3f}")
