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

from collections import ChainMap

CELERY_PRODUCTION_CONFIG = {
    "task_default_queue": "reinsurance_control",
    # a worker holds one path block at a time
    "worker_prefetch_multiplier": 1,
    "task_acks_late": True,
    "task_serializer": "json",
    "result_serializer": "json",
    "accept_content": ["json"],
    "result_expires": 24 * 60 * 60,
}

CELERY_DEBUG_CONFIG = ChainMap(
    {
        "broker_url": "redis://localhost:6379",
        "result_backend": "redis://localhost:6379",
        "task_track_started": True,
    },
    CELERY_PRODUCTION_CONFIG,
)
