# Copyright 2026 The mcrank Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Multi-channel learning-to-rank toolkit."""

import json

from ._mcrank import (
    InvalidInputError,
    Model,
    calibrate_weights,
    lambda_gradients,
    ndcg_at_k,
    normalize_labels,
    order_by_score,
    raw_label,
    rrf_fuse,
    train,
    weighted_interleave,
)

__all__ = [
    "InvalidInputError",
    "Model",
    "calibrate_weights",
    "lambda_gradients",
    "ndcg_at_k",
    "normalize_labels",
    "order_by_score",
    "raw_label",
    "rrf_fuse",
    "score",
    "train",
    "weighted_interleave",
]

__version__ = "0.1.0"


def score(model, request, pool_cap=500):
    """Scores a request dict the way the HTTP service does."""
    return json.loads(model.score_json(json.dumps(request), pool_cap))
