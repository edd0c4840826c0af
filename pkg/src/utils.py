# Standard library imports
from pathlib import Path
from typing import Dict, Union

# Third party imports
from rich.console import Console

console = Console(stderr=True)


def print_info(message: str):
    console.print(f"[bold green]INFO[/bold green]: {message}")


def print_error(message: str, file=None):
    Console(file=file, stderr=file is None).print(
        f"[bold red]ERROR[/bold red]: {message}", markup=True, highlight=False
    )


def read_key_value_file(path: Union[str, Path]) -> Dict[str, str]:
    """Parse a flat key=value file.

    Blank lines and lines starting with '#' are skipped, trailing '#' comments
    are stripped and dashes in keys are normalized to underscores.
    """

    entries: Dict[str, str] = {}
    text = Path(path).read_text()
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{number}: expected key=value, got {raw_line!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise ValueError(f"{path}:{number}: empty key")
        entries[key] = value.strip()
    return entries
