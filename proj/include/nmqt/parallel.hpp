// Copyright 2026 The nmqtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace nmqt {

// Fork-join over [begin, end): the range is split into `workers` contiguous
// chunks and chunk_fn(chunk_begin, chunk_end) runs once per chunk, each on
// its own thread. The partition affects scheduling only — results must not
// depend on it, which holds as long as chunk_fn(i..j) touches only
// per-element state (the engine's per-trajectory streams and output slots).
// The first exception thrown by any chunk is rethrown after all join.
void parallel_for(std::size_t begin, std::size_t end, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& chunk_fn);

}  // namespace nmqt
