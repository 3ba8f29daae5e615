# Copyright 2026 The squeezemag Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the squeezemag simulator."""

import json as _json

from . import _core
from ._core import (  # noqa: F401
    ConfigError,
    InvalidArgument,
    SchemaError,
    __version__,
    sensitivity,
    sql,
    targets,
    twisting_moments,
)


def default_config():
    """Reference run config as a dict."""
    return _json.loads(_core.default_config())


def normalize_config(config):
    return _json.loads(_core.normalize_config(_json.dumps(config)))


def simulate_csv(config):
    """Runs `config` (dict) and returns the shot CSV text."""
    return _core.simulate_csv(_json.dumps(config))


def analyze_csv(csv, spec=None):
    return _json.loads(_core.analyze_csv(csv, _json.dumps(spec or {})))


def reproduce(target, shots=0, seed=1, workers=1, resamples=200):
    """Runs a preset target; returns {"summary": ..., "tables": {name: {"columns", "rows"}}}."""
    return _json.loads(_core.reproduce(target, shots, seed, workers, resamples))
