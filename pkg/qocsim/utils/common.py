"""
Common utility functions used across the application.
"""

import math
import os
import json
import tempfile
import psutil
from typing import Dict, Any, Optional, Tuple, List

from qocsim.utils.errors import ConfigurationError


def ensure_directory_exists(directory: str) -> None:
    """Ensure a directory exists.

    Args:
        directory: Directory path to create if it doesn't exist
    """
    os.makedirs(directory, exist_ok=True)


def log_memory_usage(prefix: str = "") -> int:
    """Log current memory usage.

    Args:
        prefix: Prefix for the log message

    Returns:
        Current memory usage in MB
    """
    process = psutil.Process(os.getpid())
    memory_info = process.memory_info()
    current_memory = memory_info.rss // (1024 * 1024)  # Convert to MB
    print(f"{prefix} Current Memory Usage: {current_memory} MB")
    return current_memory


def cpu_time() -> float:
    """Return the user + system CPU time consumed by this process in seconds."""
    times = psutil.Process(os.getpid()).cpu_times()
    return times.user + times.system


def ticks_from_seconds(seconds: float, tick_hz: float) -> int:
    """Convert a time span to whole ticks, rounding halves up.

    The product is first rounded to 9 decimals so that 0.015 s at 100 Hz is
    1.5 ticks rather than 1.4999999999999998.
    """
    return int(math.floor(round(seconds * tick_hz, 9) + 0.5))


def format_number(value: float) -> str:
    """Format a float with 17 significant digits (lossless round-trip).

    Args:
        value: Number to format

    Returns:
        Text representation
    """
    return format(float(value), '.17g')


def load_json(filepath: str) -> Dict[str, Any]:
    """Load JSON data from a file.

    Args:
        filepath: Path to the JSON file

    Returns:
        Loaded JSON data as a dictionary
    """
    with open(filepath, 'r', encoding='utf-8') as file:
        return json.load(file)


def save_json(filepath: str, data: Dict[str, Any], indent: Optional[int] = 4) -> None:
    """Save data to a JSON file atomically.

    Args:
        filepath: Path to save the JSON file
        data: Data to save
        indent: Indentation level for the JSON file (None for compact JSON)
    """
    save_text(filepath, json.dumps(data, indent=indent, sort_keys=True) + '\n')


def load_text(filepath: str) -> str:
    """Load text data from a file.

    Args:
        filepath: Path to the text file

    Returns:
        Loaded text data as a string
    """
    with open(filepath, 'r', encoding='utf-8') as file:
        return file.read()


def save_text(filepath: str, data: str) -> None:
    """Save text data to a file via a temporary file and rename.

    Args:
        filepath: Path to save the text file
        data: Text data to save
    """
    directory = os.path.dirname(os.path.abspath(filepath))
    ensure_directory_exists(directory)
    fd, tmp_path = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as file:
            file.write(data)
        os.replace(tmp_path, filepath)
    except Exception:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def parse_key_value_text(text: str, source: str = "<string>") -> Dict[str, Tuple[str, int]]:
    """Parse flat ``key = value`` text.

    Blank lines and ``#`` comments are ignored. Keys may be dotted.

    Args:
        text: File content
        source: Name used in error messages

    Returns:
        Mapping of key to (raw value, line number)

    Raises:
        ConfigurationError: On a line without ``=``, an empty key or a duplicate key
    """
    entries: Dict[str, Tuple[str, int]] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigurationError(f"{source}:{line_number}: expected 'key = value', got '{raw_line.strip()}'")
        key, value = line.split('=', 1)
        key = key.strip()
        if not key:
            raise ConfigurationError(f"{source}:{line_number}: empty key")
        if key in entries:
            raise ConfigurationError(f"{source}:{line_number}: {key}: duplicate key")
        entries[key] = (value.strip(), line_number)
    return entries


def load_key_value_file(filepath: str) -> Dict[str, Tuple[str, int]]:
    """Load and parse a flat ``key = value`` file.

    Args:
        filepath: Path to the file

    Returns:
        Mapping of key to (raw value, line number)

    Raises:
        ConfigurationError: If the file is missing or malformed
    """
    if not os.path.isfile(filepath):
        raise ConfigurationError(f"File not found: {filepath}")
    return parse_key_value_text(load_text(filepath), source=filepath)


def parse_float(value: str, key: str, line: int, source: str = "") -> float:
    """Parse a float value, reporting the key and line on failure."""
    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(f"{source}:{line}: {key}: not a number: '{value}'") from None


def parse_int(value: str, key: str, line: int, source: str = "") -> int:
    """Parse an integer value, reporting the key and line on failure."""
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{source}:{line}: {key}: not an integer: '{value}'") from None


def parse_bool(value: str, key: str, line: int, source: str = "") -> bool:
    """Parse a boolean value (true/false, yes/no, 1/0)."""
    lowered = value.lower()
    if lowered in ('true', 'yes', '1', 'on'):
        return True
    if lowered in ('false', 'no', '0', 'off'):
        return False
    raise ConfigurationError(f"{source}:{line}: {key}: not a boolean: '{value}'")


def parse_float_list(value: str, key: str, line: int, source: str = "") -> List[float]:
    """Parse a comma separated list of floats."""
    return [parse_float(item.strip(), key, line, source) for item in value.split(',') if item.strip()]
