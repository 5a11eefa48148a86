"""Edge-stream text format: one edge per line, whitespace-separated vertex
indices, ``#`` starts a comment, blank lines ignored."""

from __future__ import annotations

from typing import Iterable, Iterator


def parse_edge_stream(lines: Iterable[str]) -> Iterator[tuple[int, ...]]:
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vertices = tuple(int(tok) for tok in line.split())
        except ValueError as exc:
            raise ValueError(f"line {lineno}: expected integer vertex ids") from exc
        yield vertices


def format_edge_stream(edges: Iterable[tuple[int, ...]]) -> str:
    return "".join(" ".join(str(v) for v in e) + "\n" for e in edges)
