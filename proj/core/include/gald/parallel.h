/*
 * Copyright 2026 The GALDetector Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GALD_PARALLEL_H_
#define GALD_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace gald {

// Number of worker threads used by ParallelFor. Defaults to the hardware
// concurrency; 0 restores the default.
void SetNumThreads(std::size_t num_threads);
std::size_t NumThreads();

// Calls fn(i) for every i in [begin, end), split into contiguous chunks across
// worker threads. fn must be safe to call concurrently for distinct i. The
// first exception thrown by any chunk is rethrown after all chunks finish.
void ParallelFor(std::size_t begin, std::size_t end,
                 const std::function<void(std::size_t)>& fn);

}  // namespace gald

#endif  // GALD_PARALLEL_H_
