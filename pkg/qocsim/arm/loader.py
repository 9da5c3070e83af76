"""
Arm description loading: built-in arms and flat ``key = value`` description files.
"""

import os
import re
from typing import Dict, Tuple

import numpy as np

from qocsim.arm.model import ArmDescription
from qocsim.utils.common import load_key_value_file, parse_float, parse_int
from qocsim.utils.errors import ConfigurationError

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

BUNDLED_ARMS = {
    'ur5': os.path.join(DATA_DIR, 'ur5.arm'),
}

_INDEXED_KEY = re.compile(r'^(vel_limit|pos_limit_lo|pos_limit_hi)\.(\d+)$')
_DH_KEY = re.compile(r'^dh\.(\d+)\.(a|alpha|d|theta_offset)$')
_DH_COLUMNS = ('a', 'alpha', 'd', 'theta_offset')


def planar2_arm() -> ArmDescription:
    """Planar two-link arm with unit links, used as a test fixture."""
    return ArmDescription(
        dh=[[1.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0]],
        vel_limit=[2.0, 2.0],
        pos_limit_lo=[-np.pi, -np.pi],
        pos_limit_hi=[np.pi, np.pi],
        name='planar2',
    )


def arm_from_entries(entries: Dict[str, Tuple[str, int]], source: str) -> ArmDescription:
    """Build an arm from parsed description entries.

    Args:
        entries: Mapping of key to (raw value, line number)
        source: File name used in error messages

    Returns:
        Arm description

    Raises:
        ConfigurationError: On unknown keys, missing keys or bad values
    """
    if 'n_joints' not in entries:
        raise ConfigurationError(f"{source}: missing key n_joints")
    value, line = entries['n_joints']
    n_joints = parse_int(value, 'n_joints', line, source)
    if n_joints < 1:
        raise ConfigurationError(f"{source}:{line}: n_joints: must be at least 1")

    dh = np.full((n_joints, 4), np.nan)
    arrays = {name: np.full(n_joints, np.nan) for name in ('vel_limit', 'pos_limit_lo', 'pos_limit_hi')}
    name = os.path.splitext(os.path.basename(source))[0]

    for key, (value, line) in entries.items():
        if key == 'n_joints':
            continue
        if key == 'name':
            name = value
            continue
        dh_match = _DH_KEY.match(key)
        indexed_match = _INDEXED_KEY.match(key)
        if dh_match:
            index = int(dh_match.group(1))
            column = _DH_COLUMNS.index(dh_match.group(2))
            target, position = dh, (index, column)
        elif indexed_match:
            index = int(indexed_match.group(2))
            target, position = arrays[indexed_match.group(1)], index
        else:
            raise ConfigurationError(f"{source}:{line}: {key}: unknown key")
        if index >= n_joints:
            raise ConfigurationError(f"{source}:{line}: {key}: joint index out of range (n_joints = {n_joints})")
        target[position] = parse_float(value, key, line, source)

    for j in range(n_joints):
        for column, label in enumerate(_DH_COLUMNS):
            if np.isnan(dh[j, column]):
                raise ConfigurationError(f"{source}: missing key dh.{j}.{label}")
        for label, values in arrays.items():
            if np.isnan(values[j]):
                raise ConfigurationError(f"{source}: missing key {label}.{j}")

    return ArmDescription(dh=dh, name=name, **arrays)


def load_arm(name_or_path: str) -> ArmDescription:
    """Load a built-in arm by name or an arm description file by path.

    Args:
        name_or_path: ``planar2``, a bundled arm name (``ur5``) or a file path

    Returns:
        Arm description

    Raises:
        ConfigurationError: If the arm cannot be found or the file is invalid
    """
    if name_or_path == 'planar2':
        return planar2_arm()
    path = BUNDLED_ARMS.get(name_or_path, name_or_path)
    if not os.path.isfile(path):
        raise ConfigurationError(f"Unknown arm '{name_or_path}' (not a built-in name or an existing file)")
    return arm_from_entries(load_key_value_file(path), path)
