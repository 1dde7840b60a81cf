#include "hmlab/boundary_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hmlab/error.hpp"
#include "json_util.hpp"

namespace hmlab {

namespace detail {

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_document(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = line_column(text, at);
    throw Error(ErrorCode::ParseError, what + ": line " + std::to_string(line) + ", column " + std::to_string(col) +
                                           ": " + e.what());
  }
}

namespace {

constexpr const char* kKinds = "point_set, segment, polyline, lipschitz_graph, cantor, flat, cloud";

void check_dims(Reader& r, int n, double d) {
  if (n < 2 || n > kMaxDim) r.problem("n", "ambient dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  if (!(d >= 0.0)) r.problem("d", "hausdorff_dim must be >= 0");
  else if (!(d < n - 1.0)) r.problem("d", "hausdorff_dim must be < n-1");
}

std::vector<Patch> patches_from_rows(Reader& r, const json& rows, int n) {
  std::vector<Patch> out;
  if (!rows.is_array()) {
    r.problem("patches", "expected rows [x1..xn, weight, radius]");
    return out;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const json& row = rows[k];
    bool good = row.is_array() && static_cast<int>(row.size()) == n + 2;
    for (std::size_t i = 0; good && i < row.size(); ++i) good = row[i].is_number();
    if (!good) {
      r.problem("patches[" + std::to_string(k) + "]", "expected " + std::to_string(n + 2) + " numbers");
      continue;
    }
    Patch p{Point(n), row[n].get<double>(), row[n + 1].get<double>()};
    for (int i = 0; i < n; ++i) p.center[i] = row[i].get<double>();
    if (p.weight < 0.0 || p.radius < 0.0) r.problem("patches[" + std::to_string(k) + "]", "weight and radius must be >= 0");
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::optional<BoundarySet> boundary_from_json(const json& j, const std::string& path, const std::string& base_dir,
                                              std::vector<std::string>& problems) {
  Reader r(j, path, problems);
  if (!r.ok()) return std::nullopt;
  const std::string kind = r.required_string("kind");
  const int n = static_cast<int>(r.integer("n", 3));
  const double log23 = std::log(2.0) / std::log(3.0);
  std::optional<BoundarySet> out;
  auto build = [&](auto&& f) {
    if (!r.ok()) return;
    try {
      out = f();
    } catch (const Error& e) {
      r.problem("kind", e.what());
    }
  };

  if (kind == "point_set") {
    r.reject_unknown({"kind", "n", "d", "points"});
    check_dims(r, n, r.number("d", 0.0));
    auto pts = r.points("points", n);
    if (pts.empty()) r.problem("points", "at least one point is required");
    build([&] { return BoundarySet::point_set(pts); });
  } else if (kind == "segment") {
    r.reject_unknown({"kind", "n", "d", "a", "b", "patches"});
    check_dims(r, n, r.number("d", 1.0));
    const Point a = r.point("a", n, true), b = r.point("b", n, true);
    const long long np = r.integer("patches", 256);
    build([&] { return BoundarySet::segment(a, b, static_cast<int>(np)); });
  } else if (kind == "polyline") {
    r.reject_unknown({"kind", "n", "d", "vertices", "spacing"});
    check_dims(r, n, r.number("d", 1.0));
    auto v = r.points("vertices", n);
    const double s = r.required_number("spacing");
    build([&] { return BoundarySet::polyline(v, s); });
  } else if (kind == "lipschitz_graph") {
    r.reject_unknown({"kind", "n", "d", "amplitude", "frequency", "extent", "spacing"});
    check_dims(r, n, r.number("d", 1.0));
    const double a = r.number("amplitude", 0.25), f = r.number("frequency", 1.0);
    const double e = r.required_number("extent"), s = r.required_number("spacing");
    build([&] { return BoundarySet::lipschitz_graph(n, a, f, e, s); });
  } else if (kind == "cantor") {
    r.reject_unknown({"kind", "n", "d", "level"});
    const double d = r.number("d", log23);
    check_dims(r, n, d);
    if (std::abs(d - log23) > 1e-9) r.problem("d", "the middle-thirds Cantor set has d = log 2 / log 3");
    const long long level = r.integer("level", 8);
    build([&] { return BoundarySet::cantor(n, static_cast<int>(level)); });
  } else if (kind == "flat") {
    r.reject_unknown({"kind", "n", "d", "extent", "spacing"});
    const double d = r.number("d", 1.0);
    check_dims(r, n, d);
    if (d != std::floor(d)) r.problem("d", "a flat plane needs an integer dimension");
    const double e = r.required_number("extent"), s = r.required_number("spacing");
    build([&] { return BoundarySet::flat(n, static_cast<int>(d), e, s); });
  } else if (kind == "cloud") {
    r.reject_unknown({"kind", "n", "d", "patches", "file"});
    const double d = r.required_number("d");
    check_dims(r, n, d);
    std::vector<Patch> patches;
    if (const json* rows = r.get("patches")) {
      patches = patches_from_rows(r, *rows, n);
    } else if (r.has("file")) {
      std::filesystem::path file = r.string("file", "");
      if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
      std::ifstream is(file);
      if (!is) {
        r.problem("file", "cannot open " + file.string());
      } else if (r.ok()) {
        try {
          BoundarySet b = read_patches_csv(is, d);
          if (b.ambient_dim() != n) r.problem("file", "column count does not match n");
          else out = std::move(b);
        } catch (const Error& e) {
          r.problem("file", e.what());
        }
        return r.ok() ? out : std::nullopt;
      }
    } else {
      r.problem("patches", "cloud needs \"patches\" or \"file\"");
    }
    build([&] { return BoundarySet::cloud(n, d, patches); });
  } else if (!kind.empty()) {
    r.problem("kind", "unknown boundary kind '" + kind + "' (known: " + kKinds + ")");
  }
  return r.ok() ? out : std::nullopt;
}

}  // namespace detail

BoundarySet parse_boundary(const std::string& json_text, const std::string& base_dir) {
  const detail::json j = detail::parse_document(json_text, "boundary");
  std::vector<std::string> problems;
  auto b = detail::boundary_from_json(j, "", base_dir, problems);
  if (!b) throw ValidationError(problems);
  return std::move(*b);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

BoundarySet load_boundary(const std::string& path, double d) {
  const std::filesystem::path p(path);
  if (p.extension() == ".csv") {
    if (d < 0.0) throw Error(ErrorCode::InvalidArgument, "a CSV patch file needs the dimension d");
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_patches_csv(is, d);
  }
  return parse_boundary(read_file(path), p.parent_path().string());
}

BoundarySet read_patches_csv(std::istream& is, double d) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "patch file: line 1: missing header");
  const auto header = split_csv(line);
  const int n = static_cast<int>(header.size()) - 2;
  if (n < 2 || n > kMaxDim || header[n] != "weight" || header[n + 1] != "radius")
    throw Error(ErrorCode::ParseError, "patch file: line 1: expected header x1..xn,weight,radius");
  std::vector<Patch> patches;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != n + 2)
      throw Error(ErrorCode::ParseError, "patch file: line " + std::to_string(lineno) + ": expected " +
                                             std::to_string(n + 2) + " columns");
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "patch file: line " + std::to_string(lineno) + ", field " + header[i] +
                                               ": not a number");
      }
    }
    Patch p{Point(n), v[n], v[n + 1]};
    for (int i = 0; i < n; ++i) p.center[i] = v[i];
    patches.push_back(p);
  }
  return BoundarySet::cloud(n, d, std::move(patches));
}

void write_patches_csv(std::ostream& os, const BoundarySet& gamma) {
  const int n = gamma.ambient_dim();
  for (int i = 0; i < n; ++i) os << 'x' << (i + 1) << ',';
  os << "weight,radius\n";
  os << std::setprecision(17);
  for (const Patch& p : gamma.patches()) {
    for (int i = 0; i < n; ++i) os << p.center[i] << ',';
    os << p.weight << ',' << p.radius << '\n';
  }
}

}  // namespace hmlab
