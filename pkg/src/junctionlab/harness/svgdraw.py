"""Minimal deterministic SVG writer.

Numbers are formatted with fixed precision and elements render in insertion
order, so identical inputs produce byte-identical files.
"""

from __future__ import annotations


def fmt(value: float) -> str:
    return f"{value:.3f}"


class SvgCanvas:
    def __init__(self, view_box: tuple[float, float, float, float],
                 width: int = 760, height: int = 640, flip_y: bool = True):
        min_x, min_y, box_w, box_h = view_box
        if flip_y:
            # world y points north; SVG y points down
            view = f"{fmt(min_x)} {fmt(-(min_y + box_h))} {fmt(box_w)} {fmt(box_h)}"
        else:
            view = f"{fmt(min_x)} {fmt(min_y)} {fmt(box_w)} {fmt(box_h)}"
        self._parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="{view}">'
        ]
        self._flip = -1.0 if flip_y else 1.0

    def _y(self, y: float) -> float:
        return self._flip * y

    def rect(self, x: float, y: float, w: float, h: float, fill: str,
             transform: str | None = None, opacity: float | None = None) -> None:
        extra = f' transform="{transform}"' if transform else ""
        if opacity is not None:
            extra += f' fill-opacity="{fmt(opacity)}"'
        self._parts.append(
            f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(w)}" '
            f'height="{fmt(h)}" fill="{fill}"{extra}/>')

    def oriented_rect(self, cx: float, cy: float, length: float, width: float,
                      heading_deg: float, fill: str,
                      opacity: float | None = None) -> None:
        transform = (f"translate({fmt(cx)} {fmt(self._y(cy))}) "
                     f"rotate({fmt(self._flip * heading_deg)})")
        self.rect(-length / 2, -width / 2, length, width, fill,
                  transform=transform, opacity=opacity)

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str,
             stroke_width: float, opacity: float | None = None) -> None:
        extra = f' stroke-opacity="{fmt(opacity)}"' if opacity is not None else ""
        self._parts.append(
            f'<line x1="{fmt(x1)}" y1="{fmt(self._y(y1))}" x2="{fmt(x2)}" '
            f'y2="{fmt(self._y(y2))}" stroke="{stroke}" '
            f'stroke-width="{fmt(stroke_width)}" stroke-linecap="round"{extra}/>')

    def polyline(self, points: list[tuple[float, float]], stroke: str,
                 stroke_width: float, fill: str = "none",
                 opacity: float | None = None) -> None:
        coords = " ".join(f"{fmt(x)},{fmt(self._y(y))}" for x, y in points)
        extra = f' stroke-opacity="{fmt(opacity)}"' if opacity is not None else ""
        self._parts.append(
            f'<polyline points="{coords}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{fmt(stroke_width)}"{extra}/>')

    def polygon(self, points: list[tuple[float, float]], fill: str,
                opacity: float | None = None) -> None:
        coords = " ".join(f"{fmt(x)},{fmt(self._y(y))}" for x, y in points)
        extra = f' fill-opacity="{fmt(opacity)}"' if opacity is not None else ""
        self._parts.append(f'<polygon points="{coords}" fill="{fill}"{extra}/>')

    def circle(self, cx: float, cy: float, r: float, stroke: str,
               stroke_width: float, fill: str = "none") -> None:
        self._parts.append(
            f'<circle cx="{fmt(cx)}" cy="{fmt(self._y(cy))}" r="{fmt(r)}" '
            f'fill="{fill}" stroke="{stroke}" stroke-width="{fmt(stroke_width)}"/>')

    def text(self, x: float, y: float, content: str, size: float = 4.0,
             fill: str = "#333333", anchor: str = "start") -> None:
        self._parts.append(
            f'<text x="{fmt(x)}" y="{fmt(self._y(y))}" font-size="{fmt(size)}" '
            f'font-family="Helvetica,Arial,sans-serif" fill="{fill}" '
            f'text-anchor="{anchor}">{content}</text>')

    def raw(self, element: str) -> None:
        self._parts.append(element)

    def render(self) -> str:
        return "\n".join(self._parts + ["</svg>"]) + "\n"
