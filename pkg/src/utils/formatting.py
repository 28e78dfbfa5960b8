from typing import Iterable, List, Tuple

ANSI_CODES = {
    "bold": "1",
    "red": "31",
    "green": "32",
    "yellow": "33",
    "cyan": "36",
}


def style(text: str, *styles: str, enabled: bool = True) -> str:
    """Wrap ``text`` in ANSI escape codes; returns it unchanged when disabled."""
    if not enabled or not styles:
        return text
    codes = ";".join(ANSI_CODES[s] for s in styles)
    return f"\033[{codes}m{text}\033[0m"


def format_bounds_table(rows: Iterable[Tuple[str, str]], color: bool = False) -> List[str]:
    """One ``Kind [lb, ub]`` line per row."""
    return [f"{style(kind, 'bold', enabled=color)} {bound}" for kind, bound in rows]


def format_counts(values: Iterable[int]) -> str:
    """Render a set of counts as ``{1,2}``."""
    return "{" + ",".join(str(v) for v in sorted(values)) + "}"


def format_vector(vector: Tuple[int, ...]) -> str:
    return "(" + ", ".join(str(v) for v in vector) + ")"
