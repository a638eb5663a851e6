#pragma once

#include "stark/config.hpp"

namespace stark::cli {

/// Builds the requested potential, writes the output bundle (grids,
/// trajectories, report, manifest) into rc.out. Returns 0 iff every target
/// energy is certified (and, for prefix plans, the envelope budget holds).
int cmd_construct(const RunConfig& rc);

/// Re-derives every applicable check from the stored potential of an
/// existing bundle and prints one pass/fail line per check.
int cmd_verify(const RunConfig& rc);

/// Runs one single-energy build per (d, alpha, E) cell and writes a CSV
/// table; cells that fail are marked and the sweep continues.
int cmd_sweep(const RunConfig& rc);

/// Emits plot-ready CSV series from an existing bundle.
int cmd_export(const RunConfig& rc);

}  // namespace stark::cli
