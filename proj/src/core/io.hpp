// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_IO_HPP
#define PILLFIT_CORE_IO_HPP

#include <string>
#include <string_view>
#include <vector>

#include "grid.hpp"
#include "pipeline.hpp"

namespace pillfit {

enum class FieldFormat { Auto, CSV, PGM };

// Fields on disk use image orientation: the first row is the top (max-y)
// row. In memory row 0 is the bottom row.
ElementField parse_field_csv(std::string_view text, const std::string& source);
ElementField parse_field_pgm(std::string_view bytes, const std::string& source);

// Values are clamped to [0, 1]. Auto picks the format from the extension.
ElementField load_target(const std::string& path,
                         FieldFormat format = FieldFormat::Auto);

void save_field_csv(const ElementField& field, const std::string& path);
// P5, maxval 255; [lo, hi] maps linearly onto [0, 255] with clamping.
void save_field_pgm(const ElementField& field, const std::string& path,
                    double lo = 0.0, double hi = 1.0);
std::string field_to_csv(const ElementField& field);
std::string field_to_pgm(const ElementField& field, double lo = 0.0,
                         double hi = 1.0);

// id,px,py,qx,qy,r with 17 significant digits.
std::string pills_to_csv(const DesignVector& design);
DesignVector parse_pills_csv(std::string_view text, const std::string& source);
void save_pills_csv(const DesignVector& design, const std::string& path);
DesignVector load_pills_csv(const std::string& path);

std::string trace_to_csv(const std::vector<TraceRow>& trace);

// Pointwise maximum of the pills' pseudo-densities, element averaged.
ElementField generate_target(const DesignVector& pills, const GridSpec& grid,
                             const TransitionSpec& tspec);

std::string read_file(const std::string& path);
// Writes via a temporary file and rename.
void write_file(const std::string& path, std::string_view data);

}  // namespace pillfit

#endif
