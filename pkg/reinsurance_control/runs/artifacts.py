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

"""Files written by the pipeline commands."""

import json
from pathlib import Path
from typing import Any, Dict, NamedTuple

from ..errors import MissingArtifactError
from ..solver.grid import FieldGrid, GridSpec
from ..util import file_checksum

XI_POST_CSV = "xi_post.csv"
U_PRE_CSV = "u_pre.csv"
XI_PRE_CSV = "xi_pre.csv"
MANIFEST_JSON = "manifest.json"
RUNTIME_JSON = "runtime.json"
ESTIMATE_JSON = "estimate.json"
PATHS_CSV = "paths.csv"
VERIFY_JSON = "verify.json"

FIELD_FILES = (XI_POST_CSV, U_PRE_CSV, XI_PRE_CSV)


def write_json(path: Path, data: Dict[str, Any]):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def read_json(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise MissingArtifactError(f"Missing artifact '{path}', run the solve command first.")
    return json.loads(path.read_text())


def require(path: Path) -> Path:
    if not path.is_file():
        raise MissingArtifactError(f"Missing artifact '{path}', run the solve command first.")
    return path


class StoredSolution(NamedTuple):
    xi_post: FieldGrid
    u_pre: FieldGrid
    xi_pre: FieldGrid


def load_solution(outputs: Path, spec: GridSpec) -> StoredSolution:
    """Read the solved fields written by the solve command for the lattice ``spec``."""
    return StoredSolution(
        xi_post=FieldGrid.from_csv(require(outputs / XI_POST_CSV), spec, "xi"),
        u_pre=FieldGrid.from_csv(require(outputs / U_PRE_CSV), spec, "u"),
        xi_pre=FieldGrid.from_csv(require(outputs / XI_PRE_CSV), spec, "xi"),
    )


def checksum_mismatches(outputs: Path) -> Dict[str, str]:
    """Compare the checksums recorded in the manifest with the files on disk."""
    manifest = read_json(outputs / MANIFEST_JSON)
    mismatches = {}
    for name, expected in manifest.get("checksums", {}).items():
        path = outputs / name
        if not path.is_file():
            mismatches[name] = "missing"
        elif file_checksum(path) != expected:
            mismatches[name] = "checksum mismatch"
    return mismatches
