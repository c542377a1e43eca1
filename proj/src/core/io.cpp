// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"

namespace pillfit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    const size_t end = line.find(',', pos);
    if (end == std::string_view::npos) {
      out.push_back(trim(line.substr(pos)));
      break;
    }
    out.push_back(trim(line.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

double parse_number(std::string_view tok, const std::string& where) {
  double v = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(where + ": invalid number '" + std::string(tok) + "'");
  }
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, std::string_view data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("error while writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

ElementField parse_field_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  const auto lines = split_lines(text);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = trim(lines[ln]);
    if (line.empty()) {
      // Blank lines are only tolerated at the end of the file.
      bool tail = true;
      for (size_t k = ln + 1; k < lines.size(); ++k) {
        if (!trim(lines[k]).empty()) tail = false;
      }
      if (tail) break;
      throw ParseError(source + ": line " + std::to_string(ln + 1) +
                       ": empty row");
    }
    const auto toks = split_commas(line);
    std::vector<double> row;
    row.reserve(toks.size());
    for (size_t c = 0; c < toks.size(); ++c) {
      row.push_back(parse_number(toks[c], source + ": line " +
                                              std::to_string(ln + 1) +
                                              ", column " +
                                              std::to_string(c + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source + ": line " + std::to_string(ln + 1) +
                       ": row has " + std::to_string(row.size()) +
                       " values, expected " +
                       std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");
  const int ny = static_cast<int>(rows.size());
  const int nx = static_cast<int>(rows.front().size());
  ElementField f(nx, ny);
  for (int r = 0; r < ny; ++r) {
    for (int i = 0; i < nx; ++i) f.at(i, ny - 1 - r) = rows[r][i];
  }
  return f;
}

ElementField parse_field_pgm(std::string_view bytes, const std::string& source) {
  size_t pos = 0;
  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError(source + ": byte " + std::to_string(pos) + ": " + what);
  };
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_ws();
    const size_t start = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') ++pos;
    if (start == pos) throw fail(std::string("expected ") + what);
    int v = 0;
    std::from_chars(bytes.data() + start, bytes.data() + pos, v);
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw fail("not a P2/P5 PGM file");
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  const int nx = read_int("width");
  const int ny = read_int("height");
  const int maxval = read_int("maxval");
  if (nx < 1 || ny < 1) throw fail("image dimensions must be positive");
  if (maxval < 1 || maxval > 255) throw fail("maxval must be in [1, 255]");

  ElementField f(nx, ny);
  const size_t count = static_cast<size_t>(nx) * ny;
  if (binary) {
    if (pos >= bytes.size()) throw fail("missing raster");
    ++pos;  // single whitespace after maxval
    if (bytes.size() - pos < count) {
      throw fail("raster truncated: expected " + std::to_string(count) +
                 " bytes, found " + std::to_string(bytes.size() - pos));
    }
    for (size_t k = 0; k < count; ++k) {
      const auto v = static_cast<unsigned char>(bytes[pos + k]);
      if (v > maxval) {
        pos += k;
        throw fail("sample exceeds maxval");
      }
      const int i = static_cast<int>(k % nx);
      const int r = static_cast<int>(k / nx);
      f.at(i, ny - 1 - r) = static_cast<double>(v) / maxval;
    }
  } else {
    for (size_t k = 0; k < count; ++k) {
      const int v = read_int("sample");
      if (v > maxval) throw fail("sample exceeds maxval");
      const int i = static_cast<int>(k % nx);
      const int r = static_cast<int>(k / nx);
      f.at(i, ny - 1 - r) = static_cast<double>(v) / maxval;
    }
  }
  return f;
}

ElementField load_target(const std::string& path, FieldFormat format) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("target file '" + path + "' does not exist");
  }
  if (format == FieldFormat::Auto) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") {
      format = FieldFormat::PGM;
    } else if (ext == ".csv" || ext == ".txt") {
      format = FieldFormat::CSV;
    } else {
      throw ValidationError("cannot infer target format from '" + path + "'");
    }
  }
  const std::string data = read_file(path);
  ElementField f = format == FieldFormat::PGM ? parse_field_pgm(data, path)
                                              : parse_field_csv(data, path);
  for (double& v : f.values) {
    if (!std::isfinite(v)) throw ParseError(path + ": non-finite value");
    v = std::clamp(v, 0.0, 1.0);
  }
  return f;
}

std::string field_to_csv(const ElementField& field) {
  std::string out;
  for (int r = 0; r < field.ny; ++r) {
    const int j = field.ny - 1 - r;
    for (int i = 0; i < field.nx; ++i) {
      if (i) out += ',';
      out += fmt17(field.at(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string field_to_pgm(const ElementField& field, double lo, double hi) {
  std::string out = "P5\n" + std::to_string(field.nx) + " " +
                    std::to_string(field.ny) + "\n255\n";
  out.reserve(out.size() + field.values.size());
  for (int r = 0; r < field.ny; ++r) {
    const int j = field.ny - 1 - r;
    for (int i = 0; i < field.nx; ++i) {
      const double t = std::clamp((field.at(i, j) - lo) / (hi - lo), 0.0, 1.0);
      out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t)));
    }
  }
  return out;
}

void save_field_csv(const ElementField& field, const std::string& path) {
  write_file(path, field_to_csv(field));
}

void save_field_pgm(const ElementField& field, const std::string& path,
                    double lo, double hi) {
  write_file(path, field_to_pgm(field, lo, hi));
}

std::string pills_to_csv(const DesignVector& design) {
  std::string out = "id,px,py,qx,qy,r\n";
  for (int m = 0; m < design.size(); ++m) {
    const auto& p = design.pills[m];
    out += std::to_string(m) + ',' + fmt17(p.px()) + ',' + fmt17(p.py()) + ',' +
           fmt17(p.qx()) + ',' + fmt17(p.qy()) + ',' + fmt17(p.r()) + '\n';
  }
  return out;
}

DesignVector parse_pills_csv(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  DesignVector out;
  std::set<long long> ids;
  bool header_seen = false;
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = trim(lines[ln]);
    if (line.empty()) continue;
    const std::string where = source + ": line " + std::to_string(ln + 1);
    const auto toks = split_commas(line);
    if (!header_seen) {
      header_seen = true;
      if (toks.size() == 6 && toks[0] == "id") continue;
      throw ParseError(where + ": expected header 'id,px,py,qx,qy,r'");
    }
    if (toks.size() != 6) {
      throw ParseError(where + ": expected 6 fields, got " +
                       std::to_string(toks.size()));
    }
    const double id = parse_number(toks[0], where + ", column 1");
    if (id != std::floor(id)) throw ParseError(where + ": id must be an integer");
    if (!ids.insert(static_cast<long long>(id)).second) {
      throw ParseError(where + ": duplicate id " + std::string(toks[0]));
    }
    double v[5];
    for (int c = 0; c < 5; ++c) {
      v[c] = parse_number(toks[c + 1], where + ", column " + std::to_string(c + 2));
      if (!std::isfinite(v[c])) throw ParseError(where + ": non-finite value");
    }
    try {
      out.push_back(PillParams(v[0], v[1], v[2], v[3], v[4]));
    } catch (const InvalidGeometry& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (!header_seen) throw ParseError(source + ": missing header");
  return out;
}

void save_pills_csv(const DesignVector& design, const std::string& path) {
  write_file(path, pills_to_csv(design));
}

DesignVector load_pills_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("pill table '" + path + "' does not exist");
  }
  return parse_pills_csv(read_file(path), path);
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out = "eval_index,objective,stage\n";
  for (const auto& row : trace) {
    out += std::to_string(row.eval_index) + ',' + fmt17(row.objective) + ',' +
           row.stage + '\n';
  }
  return out;
}

ElementField generate_target(const DesignVector& pills, const GridSpec& grid,
                             const TransitionSpec& tspec) {
  grid.validate();
  ElementField f(grid.nx, grid.ny);
  if (pills.empty()) return f;
  const int q = grid.quad_order;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double sum = 0.0;
      for (Point2 x : quad_points_ij(grid, i, j, q)) {
        double best = 0.0;
        for (const auto& p : pills.pills) {
          best = std::max(best, pseudo_density(tspec, p, x));
        }
        sum += best;
      }
      f.at(i, j) = std::clamp(sum / (q * q), 0.0, 1.0);
    }
  }
  return f;
}

}  // namespace pillfit
