#pragma once

#include <filesystem>
#include <string>

#include "hjhomog/cover.hpp"
#include "hjhomog/effective.hpp"
#include "hjhomog/grid.hpp"

namespace homog {

// Shortest decimal form that round-trips to the same double (%.17g trimmed).
std::string format_double(double x);
double parse_double(const std::string& token);

// value-field CSV:
//   # dim,n,time
//   index,x0[,x1],value
void write_value_field_csv(const std::filesystem::path& path,
                           const ValueField& field);
ValueField read_value_field_csv(const std::filesystem::path& path);

// alpha-table CSV:
//   P0[,P1],alpha,method,error_bar
void write_alpha_table_csv(const std::filesystem::path& path,
                           const AlphaTable& table);
AlphaTable read_alpha_table_csv(const std::filesystem::path& path);

// graph text format:
//   line 1: "<rank> <base_nodes> <arc_count>", optionally followed by the
//           word "symmetric"
//   then one line per entry: "tail head length cost z_1 .. z_rank"
// Vertex indices are 0-based. With "symmetric" each line is an undirected
// edge and the reverse arc is generated automatically; otherwise each line
// is a single directed arc. Writing always emits the directed form. Torsion
// factors have no text form.
void write_graph_text(const std::filesystem::path& path,
                      const GraphComplex& base);
GraphComplex read_graph_text(const std::filesystem::path& path);

}  // namespace homog
