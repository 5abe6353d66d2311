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

"""Celery instance that runs blocks of Monte Carlo paths in workers."""

from logging import Logger, getLogger

from celery import Celery, Task
from celery.signals import after_setup_task_logger
from flask.app import Flask
from flask.globals import app_ctx

LOGGER = getLogger(__name__)


def _propagate_task_logs(logger: Logger, **kwargs):
    """Let task logs reach the handlers configured by the app factory."""
    logger.propagate = True


after_setup_task_logger.connect(_propagate_task_logs)


class FlaskTask(Task):
    """Task base class that runs every task inside a flask app context."""

    def __call__(self, *args, **kwargs):
        if app_ctx:
            return self.run(*args, **kwargs)
        with self.app.flask_app.app_context():
            return self.run(*args, **kwargs)

    def on_failure(self, exc, task_id, args, kwargs, einfo):
        LOGGER.error(f"Task '{self.name}' [{task_id}] failed: {exc!r}")


CELERY = Celery(__name__, flask_app=None, task_cls=FlaskTask)


def register_celery(app: Flask):
    """Configure the celery instance from ``app.config["CELERY"]`` and load the tasks."""
    CELERY.conf.update(app.config.get("CELERY", {}))
    CELERY.flask_app = app

    from . import tasks  # noqa

    registered = sorted(name for name in CELERY.tasks if not name.startswith("celery."))
    app.logger.info(
        f"Celery tasks {registered} with settings:\n"
        f"{CELERY.conf.humanize(with_defaults=False, censored=True)}\n"
    )
