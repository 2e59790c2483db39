#include "hjhomog/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace homog {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open for reading: " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream stream(line);
  while (std::getline(stream, token, sep)) out.push_back(token);
  return out;
}

long parse_long(const std::string& token) {
  long value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw input_error("malformed integer: '" + token + "'");
  return value;
}

}  // namespace

std::string format_double(double x) {
  // Shortest of %.15g / %.16g / %.17g that parses back bit-identically.
  char buf[32];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  double value = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty())
    throw input_error("malformed number: '" + token + "'");
  return value;
}

void write_value_field_csv(const std::filesystem::path& path,
                           const ValueField& field) {
  std::ofstream out = open_out(path);
  const PeriodicGrid& grid = field.grid();
  out << "# dim=" << grid.dim() << ",n=" << grid.n()
      << ",time=" << format_double(field.time()) << "\n";
  out << (grid.dim() == 1 ? "index,x0,value\n" : "index,x0,x1,value\n");
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    Vec x = grid.coords(i);
    out << i << ',' << format_double(x[0]);
    if (grid.dim() == 2) out << ',' << format_double(x[1]);
    out << ',' << format_double(field[i]) << "\n";
  }
  if (!out) throw input_error("write failed: " + path.string());
}

ValueField read_value_field_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# dim=", 0) != 0)
    throw input_error("value-field CSV missing header: " + path.string());
  int dim = 0, n = 0;
  double time = 0.0;
  {
    auto fields = split(line.substr(2), ',');
    for (const auto& field : fields) {
      auto eq = field.find('=');
      if (eq == std::string::npos)
        throw input_error("malformed header field: '" + field + "'");
      std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      if (key == "dim")
        dim = int(parse_long(value));
      else if (key == "n")
        n = int(parse_long(value));
      else if (key == "time")
        time = parse_double(value);
      else
        throw input_error("unknown header field: '" + key + "'");
    }
  }
  if (!std::getline(in, line))
    throw input_error("value-field CSV truncated: " + path.string());

  PeriodicGrid grid(dim, n);
  std::vector<double> values(grid.node_count());
  std::vector<char> seen(grid.node_count(), 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != std::size_t(dim) + 2)
      throw input_error("bad column count in row: '" + line + "'");
    long index = parse_long(cols[0]);
    if (index < 0 || std::size_t(index) >= grid.node_count())
      throw input_error("node index out of range: " + cols[0]);
    values[index] = parse_double(cols.back());
    seen[index] = 1;
  }
  for (char s : seen)
    if (!s) throw input_error("value-field CSV is missing rows");
  return ValueField(grid, std::move(values), time);
}

void write_alpha_table_csv(const std::filesystem::path& path,
                           const AlphaTable& table) {
  std::ofstream out = open_out(path);
  out << (table.dim == 1 ? "P0,alpha,method,error_bar\n"
                         : "P0,P1,alpha,method,error_bar\n");
  for (const auto& entry : table.entries) {
    out << format_double(entry.P[0]) << ',';
    if (table.dim == 2) out << format_double(entry.P[1]) << ',';
    out << format_double(entry.alpha) << ',' << entry.method << ','
        << format_double(entry.error_bar) << "\n";
  }
  if (!out) throw input_error("write failed: " + path.string());
}

AlphaTable read_alpha_table_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw input_error("alpha-table CSV is empty: " + path.string());
  AlphaTable table;
  if (line == "P0,alpha,method,error_bar")
    table.dim = 1;
  else if (line == "P0,P1,alpha,method,error_bar")
    table.dim = 2;
  else
    throw input_error("alpha-table CSV has an unknown header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != std::size_t(table.dim) + 3)
      throw input_error("bad column count in row: '" + line + "'");
    AlphaEntry entry;
    entry.P[0] = parse_double(cols[0]);
    if (table.dim == 2) entry.P[1] = parse_double(cols[1]);
    entry.alpha = parse_double(cols[table.dim]);
    entry.method = cols[table.dim + 1];
    entry.error_bar = parse_double(cols[table.dim + 2]);
    table.entries.push_back(std::move(entry));
  }
  return table;
}

void write_graph_text(const std::filesystem::path& path,
                      const GraphComplex& base) {
  if (!base.torsion_moduli().empty())
    throw input_error("graph text format cannot carry torsion factors");
  std::ofstream out = open_out(path);
  out << base.rank() << ' ' << base.base_nodes() << ' ' << base.arcs().size()
      << "\n";
  for (const auto& arc : base.arcs()) {
    out << arc.tail << ' ' << arc.head << ' ' << format_double(arc.length)
        << ' ' << format_double(arc.cost);
    for (int a = 0; a < base.rank(); ++a) out << ' ' << arc.z[a];
    out << "\n";
  }
  if (!out) throw input_error("write failed: " + path.string());
}

GraphComplex read_graph_text(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw input_error("graph file is empty: " + path.string());
  std::istringstream head(line);
  int rank = 0, nodes = 0;
  long long entries = 0;
  if (!(head >> rank >> nodes >> entries))
    throw input_error("graph file header must read 'rank nodes arcs'");
  std::string flag;
  bool symmetric = false;
  if (head >> flag) {
    if (flag != "symmetric")
      throw input_error("unknown graph header flag: '" + flag + "'");
    symmetric = true;
  }
  if (rank < 0 || rank > kMaxRank)
    throw input_error("graph rank out of range");

  GraphComplex base(nodes, rank);
  for (long long i = 0; i < entries; ++i) {
    if (!std::getline(in, line))
      throw input_error("graph file truncated: " + path.string());
    std::istringstream row(line);
    int tail = 0, head_node = 0;
    double length = 0.0, cost = 0.0;
    if (!(row >> tail >> head_node >> length >> cost))
      throw input_error("malformed graph row: '" + line + "'");
    LatticeVec z = lattice_zero();
    for (int a = 0; a < rank; ++a)
      if (!(row >> z[a]))
        throw input_error("graph row is missing wrap labels: '" + line + "'");
    int extra;
    if (row >> extra)
      throw input_error("trailing tokens in graph row: '" + line + "'");
    if (symmetric)
      base.add_edge(tail, head_node, cost, length, z);
    else
      base.add_arc(tail, head_node, cost, length, z);
  }
  return base;
}

}  // namespace homog
