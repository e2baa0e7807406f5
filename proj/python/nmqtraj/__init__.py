# Copyright 2026 The nmqtraj Authors
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

"""Non-Markovian trajectory toolkit.

Thin Python façade over the compiled core: scenario-driven ensemble runs of
the jump, diffusion and coherent-noise unravelings, the decay-rate solver,
and the deterministic helpers (bandwidth rule, counter-based RNG blocks,
jump-family diagnostics).
"""

from ._core import (
    __version__,
    jump_family_info,
    kde_bandwidth,
    philox_block,
    run_scenario,
    solve_rates,
)

__all__ = [
    "__version__",
    "jump_family_info",
    "kde_bandwidth",
    "philox_block",
    "run_scenario",
    "solve_rates",
]
