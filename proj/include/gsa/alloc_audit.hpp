#pragma once

#include <cstddef>
#include <cstdint>

// Heap audit counters. The hooks that feed them live in alloc_audit_new.cpp,
// which replaces the global operator new/delete; link that translation unit
// into a binary to activate auditing (the CLI and the acceptance suite do).
// Without it the counters read as zero.
namespace gsa::alloc_audit {

// Live heap bytes attributed to this process since the hooks were linked.
std::int64_t live_bytes();

// Largest single allocation observed since the last reset.
std::size_t max_single_allocation();

// Peak of live_bytes() since the last reset.
std::int64_t peak_live_bytes();

// Rebases the peak to the current live figure and clears max_single.
void reset_window();

bool hooks_active();

// Internal: called by the operator new/delete replacements.
void record_alloc(std::size_t bytes);
void record_free(std::size_t bytes);
void mark_active();

}  // namespace gsa::alloc_audit
