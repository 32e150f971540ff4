#pragma once

namespace factorfuse {

/// Serial runs every kernel loop on the calling thread and is the reference
/// the OpenMP kernels are tested against.
enum class Execution { Serial, Parallel };

/// Thread count for the parallel kernels: `requested` when positive, else
/// FACTORFUSE_THREADS when set, else the OpenMP default.
int resolve_threads(int requested);

}  // namespace factorfuse
