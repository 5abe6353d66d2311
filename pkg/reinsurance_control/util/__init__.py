# Copyright 2024 reinsurance-control contributors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from hashlib import sha256
from pathlib import Path
from typing import Sequence, Union

import numpy as np


def camelcase(s: str) -> str:
    """Turn a string from python snake_case into camelCase."""
    parts = iter(s.split("_"))
    return next(parts) + "".join(i.title() for i in parts)


def write_table(path: Union[str, Path], columns: Sequence[str], rows: np.ndarray) -> str:
    """Write a numeric table as CSV with a header row and return its sha256 checksum.

    Values are written with 17 significant digits so that reading the file
    back reproduces every float exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.asarray(rows, dtype=float).reshape(-1, len(columns))
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=",".join(columns), comments="")
    return file_checksum(path)


def read_table(path: Union[str, Path], columns: Sequence[str]) -> np.ndarray:
    """Read a table written by :func:`write_table`, checking the header."""
    path = Path(path)
    with path.open("r") as f:
        header = f.readline().strip()
    if header != ",".join(columns):
        raise ValueError(f"Unexpected header '{header}' in '{path}'.")
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def file_checksum(path: Union[str, Path]) -> str:
    return sha256(Path(path).read_bytes()).hexdigest()
