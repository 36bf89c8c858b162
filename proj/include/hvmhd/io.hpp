#pragma once

#include "hvmhd/state.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hvmhd {

// Scalars that must survive a restart alongside the state so the energy
// ledger, the step size, and the step count continue exactly.
struct RunningTotals {
    std::uint64_t step_index = 0;
    double dt = 0.0;
    double e_total_initial = 0.0;
    double cumulative_dissipation = 0.0;
};

// Column order is part of the format; every value is printed with %.17g so a
// re-parse recovers the doubles exactly.
extern const char* const diagnostics_csv_header;
std::string diagnostics_csv_row(const PlasmaState& st, const RunningTotals& totals);

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary snapshot: magic "HVMHD\x01", version, grid and physics metadata,
// the running totals, the Hermitian-independent half of each coefficient
// cube, the marker arrays, and a 64-bit FNV-1a checksum trailer over all
// preceding bytes. Little-endian doubles throughout. Reading reconstructs
// the mirrored coefficients bitwise, so write/read round-trips are exact.
void write_checkpoint(const std::string& path, const PlasmaState& st, const RunningTotals& totals);

struct Checkpoint {
    PlasmaState state;
    RunningTotals totals;
};

// Throws CheckpointError on a bad magic or version (refusal), a short file,
// a checksum mismatch, or trailing garbage.
Checkpoint read_checkpoint(const std::string& path);

// Human-readable metadata block; validates the whole file first.
std::string checkpoint_info(const std::string& path);

} // namespace hvmhd
