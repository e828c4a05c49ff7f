# Copyright 2026 The DriftArena Authors.
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

"""Adversarial drift game between a packet-perturbing attacker and a drift-adapting defender."""

from ._core import (
    ADAPTATION_ACTIONS,
    BLUE_STATE_DIM,
    FEATURE_DIM,
    PERTURB_ACTIONS,
    AdaptationBudget,
    Classifier,
    ConfigError,
    DqnAgent,
    Error,
    Label,
    MalformedPacket,
    Metrics,
    Packet,
    PpoAgent,
    RejectedPacket,
    blue_reward,
    config_keys,
    default_config,
    entropy,
    kl_divergence,
    packet_valid,
    perturb,
    perturb_action_name,
    preprocess,
    red_reward,
    run_game,
    select_active,
    select_continual,
    split_sizes,
    synthesize,
    wasserstein,
)

__version__ = "0.1.0"
