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

from contextlib import contextmanager
from logging import INFO, Logger, getLogger
from time import perf_counter
from typing import Dict, Iterator, Optional

from flask import Flask


def get_logger(app: Flask, name: str) -> Logger:
    """Get a child logger of the app.logger for one part of the pipeline."""
    return getLogger(f"{app.import_name}.{name}")


@contextmanager
def timed(
    logger: Logger, label: str, timings: Optional[Dict[str, float]] = None
) -> Iterator[None]:
    """Log the wall clock duration of the enclosed block (and record it in ``timings``)."""
    start = perf_counter()
    try:
        yield
    finally:
        duration = perf_counter() - start
        if timings is not None:
            timings[label] = duration
        logger.log(INFO, f"{label} took {duration:.3f}s")
