#pragma once

#include <cstddef>
#include <functional>

namespace clinpred {

// Runs body(i) for i in [0, n). threads <= 1 takes the plain serial loop,
// which doubles as the reference path the tests compare the OpenMP path
// against; any other value fans out over OpenMP when available. Bodies must
// be independent tasks that write only to their own slot.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

// Hardware threads reported by OpenMP, 1 when built without it.
int hardware_threads();

} // namespace clinpred
