"""Standalone color-coded HTML for word-level tags."""

from __future__ import annotations

import html
import json
import logging

from .corpus import AnnotatedDocument
from .schemes import TagSet, get_scheme

log = logging.getLogger(__name__)

UNKNOWN_COLOR = "#b0b0b0"

PALETTES = {
    "arrow": {"I1": "#8dd3c7", "I2": "#fb8072", "E1": "#80b1d3", "E2": "#bebada",
              "O": "#fdb462", "C": "#b3de69", "T": "#fccde5"},
    "persuade": {"L": "#8dd3c7", "P": "#fb8072", "C1": "#fdb462", "C2": "#bebada",
                 "R": "#fccde5", "E": "#80b1d3", "C3": "#b3de69"},
    "aae_component": {"MC": "#fb8072", "Cl": "#fdb462", "Pr": "#80b1d3"},
    "aae_bio": {"B": "#fb8072", "I": "#80b1d3"},
}


def load_palette(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        palette = json.load(fh)
    if not isinstance(palette, dict) or not all(isinstance(v, str) for v in palette.values()):
        raise ValueError(f"{path}: palette must map tags to color strings")
    return palette


def _escape(text: str) -> str:
    # parsers fold CR into LF unless it is a character reference
    return html.escape(text, quote=False).replace("\r", "&#13;")


def tag_runs(tags) -> list[tuple[int, int, str]]:
    """Maximal runs of equal tags as ``(start, end, tag)``."""
    runs = []
    start = 0
    for i in range(1, len(tags) + 1):
        if i == len(tags) or tags[i] != tags[start]:
            runs.append((start, i, tags[start]))
            start = i
    return runs


def export_html(doc: AnnotatedDocument, tags, scheme, palette: dict | None = None,
                title: str | None = None) -> str:
    """Highlight each run of same-tag words; untagged words stay plain.

    The essay body keeps the document text verbatim (``pre-wrap``), so
    stripping the markup gives back ``doc.text``.
    """
    scheme: TagSet = get_scheme(scheme)
    if len(tags) != len(doc.words):
        raise ValueError(f"{len(tags)} tags for {len(doc.words)} words")
    colors = dict(PALETTES.get(scheme.scheme.value.lower(), {}))
    colors.update(palette or {})
    none = scheme.none_tag or "None"
    known = set(scheme.labels)

    body = []
    cursor = 0
    used = []
    for s, e, tag in tag_runs(list(tags)):
        if tag == none or (tag == "O" and scheme.scheme.value == "AAE_BIO"):
            continue
        start, end = doc.words[s][0], doc.words[e - 1][1]
        body.append(_escape(doc.text[cursor:start]))
        if tag in known and tag in colors:
            color, cls = colors[tag], f"tag-{tag}"
        else:
            log.warning("%s: tag %r has no color; rendered as unknown", doc.doc_id, tag)
            color, cls = UNKNOWN_COLOR, "tag-unknown"
        if tag not in used:
            used.append(tag)
        label = html.escape(scheme.long_names.get(tag, tag))
        body.append(f'<span class="{cls}" style="background:{color}" title="{label}">'
                    f"{_escape(doc.text[start:end])}</span>")
        cursor = end
    body.append(_escape(doc.text[cursor:]))

    legend = []
    for tag in used:
        color = colors.get(tag, UNKNOWN_COLOR) if tag in known else UNKNOWN_COLOR
        name = html.escape(scheme.long_names.get(tag, tag))
        legend.append(f'<li><span class="swatch" style="background:{color}">&nbsp;&nbsp;&nbsp;</span> '
                      f"{html.escape(tag)}: {name}</li>")
    title = html.escape(title or doc.doc_id)
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{title}</title>"
        "<style>body{font-family:sans-serif;max-width:48em;margin:2em auto}"
        "#essay{white-space:pre-wrap;line-height:1.6}"
        "#legend{list-style:none;padding:0}</style></head>\n<body>\n"
        f"<h1>{title}</h1>\n<ul id=\"legend\">{''.join(legend)}</ul>\n"
        f"<div id=\"essay\">{''.join(body)}</div>\n</body></html>\n"
    )
