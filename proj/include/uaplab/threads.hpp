#pragma once

namespace uaplab {

// Number of OpenMP workers used by batch kernels. Respects the
// UAPLAB_THREADS environment variable and any programmatic override;
// always at least 1.
int worker_count();

// Override the worker cap for the current process (0 restores the
// environment/default behaviour). Used by determinism tests.
void set_worker_cap(int n);

} // namespace uaplab
