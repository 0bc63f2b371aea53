#include "schrodinger/problem_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "schrodinger/error.hpp"

namespace schrodinger {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "/" + key + ": missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path + ": expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path + "/" + std::to_string(k)));
  return out;
}

DenseMatrix matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path + ": expected a nonempty array of rows");
  const auto first = numbers(j[0], path + "/0");
  DenseMatrix m(j.size(), first.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto row = numbers(j[i], path + "/" + std::to_string(i));
    if (row.size() != m.cols()) throw SchemaError(path + "/" + std::to_string(i) + ": ragged row");
    for (std::size_t k = 0; k < row.size(); ++k) m(i, k) = row[k];
  }
  return m;
}

json matrix_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

DiscreteSpace space_from_json(const json& j, const std::string& path) {
  const json& pts = field(j, "points", path);
  if (!pts.is_array()) throw SchemaError(path + "/points: expected an array");
  std::vector<std::vector<double>> points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::string p = path + "/points/" + std::to_string(k);
    if (pts[k].is_number())
      points.push_back({number(pts[k], p)});
    else
      points.push_back(numbers(pts[k], p));
  }
  auto weights = numbers(field(j, "weights", path), path + "/weights");
  if (!points.empty() && points.front().empty()) throw SchemaError(path + "/points: empty point");
  for (const auto& p : points)
    if (p.size() != points.front().size())
      throw SchemaError(path + "/points: points have inconsistent dimensions");
  if (weights.size() != points.size())
    throw SchemaError(path + ": points and weights have different lengths");
  return DiscreteSpace::from_points(points, std::move(weights));
}

json space_to_json(const DiscreteSpace& s) {
  json pts = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto p = s.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return {{"points", pts}, {"weights", s.weights}};
}

Eigen::MatrixXd gaussian_matrix(const json& j, const std::string& path) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, number(j, path));
  if (j.is_array() && !j.empty() && j[0].is_number()) {
    const auto d = numbers(j, path);
    return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()))
        .asDiagonal();
  }
  const DenseMatrix m = matrix(j, path);
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k)
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = m(i, k);
  return e;
}

json eigen_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) r[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(r);
  }
  return rows;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

// --- CSV -------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view cell, const std::string& file, std::size_t line,
                    std::size_t column) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
    cell.remove_suffix(1);
  double v = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
      !std::isfinite(v))
    throw ParseError(file, line, "column " + std::to_string(column),
                     "not a finite decimal number: '" + std::string(cell) + "'");
  return v;
}

std::vector<std::vector<double>> read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0, column = 1;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell(line.data() + start,
                                  (comma == std::string::npos ? line.size() : comma) - start);
      row.push_back(parse_double(cell, path.string(), lineno, column));
      if (comma == std::string::npos) break;
      start = comma + 1;
      ++column;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> read_csv_column(const fs::path& path) {
  std::vector<double> out;
  std::size_t k = 0;
  for (const auto& row : read_csv(path)) {
    ++k;
    if (row.size() != 1)
      throw ParseError(path.string(), k, "", "expected one value per line");
    out.push_back(row[0]);
  }
  return out;
}

void write_csv_rows(const fs::path& path, const std::vector<std::vector<double>>& rows) {
  std::string text;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) text += ',';
      text += format_double(row[k]);
    }
    text += '\n';
  }
  write_file(path, text);
}

void write_csv_column(const fs::path& path, const std::vector<double>& v) {
  std::vector<std::vector<double>> rows;
  for (double x : v) rows.push_back({x});
  write_csv_rows(path, rows);
}

DiscreteSpace load_space_csv(const fs::path& dir, std::vector<double>& marginal) {
  const auto points = read_csv(dir / "points.csv");
  auto weights = read_csv_column(dir / "weights.csv");
  marginal = read_csv_column(dir / "marginal.csv");
  for (std::size_t k = 0; k < points.size(); ++k)
    if (points[k].size() != points.front().size())
      throw ParseError((dir / "points.csv").string(), k + 1, "",
                       "points have inconsistent dimensions");
  if (weights.size() != points.size())
    throw SchemaError((dir / "weights.csv").string() + ": length differs from points.csv");
  return DiscreteSpace::from_points(points, std::move(weights));
}

void save_space_csv(const fs::path& dir, const DiscreteSpace& s, const std::vector<double>& m) {
  fs::create_directories(dir);
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto p = s.point(i);
    pts.emplace_back(p.begin(), p.end());
  }
  write_csv_rows(dir / "points.csv", pts);
  write_csv_column(dir / "weights.csv", s.weights);
  write_csv_column(dir / "marginal.csv", m);
}

}  // namespace

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t k = 0; k + 1 < end; ++k)
      if (text[k] == '\n') ++line;
    throw ParseError(source, line, "", e.what());
  }
}

json read_json_file(const fs::path& path) { return parse_json(read_file(path), path.string()); }

json kernel_to_json(const Kernel& k) {
  json j;
  j["kind"] = to_string(k.kind);
  switch (k.kind) {
    case KernelKind::dense:
      j["entries"] = matrix_json(k.entries);
      break;
    case KernelKind::gaussian:
      j["precision"] = matrix_json(k.precision);
      break;
    case KernelKind::radial: {
      using S = RadialProfile::Shape;
      json p;
      switch (k.profile.shape) {
        case S::gaussian:
          p = {{"shape", "gaussian"}, {"scale", k.profile.scale}};
          break;
        case S::exponential:
          p = {{"shape", "exponential"}, {"scale", k.profile.scale}};
          break;
        case S::table:
          p = {{"shape", "table"}, {"t", k.profile.t}, {"theta", k.profile.theta}};
          break;
        case S::custom:
          throw SchemaError("kernel: custom radial profiles cannot be serialized");
      }
      j["profile"] = p;
      if (k.cutoff) j["cutoff"] = *k.cutoff;
      break;
    }
  }
  return j;
}

Kernel kernel_from_json(const json& j) {
  const json& kind = field(j, "kind", "/kernel");
  if (!kind.is_string()) throw SchemaError("/kernel/kind: expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "dense") return Kernel::dense(matrix(field(j, "entries", "/kernel"), "/kernel/entries"));
  if (k == "gaussian")
    return Kernel::gaussian(matrix(field(j, "precision", "/kernel"), "/kernel/precision"));
  if (k == "radial") {
    const json& p = field(j, "profile", "/kernel");
    const json& shape = field(p, "shape", "/kernel/profile");
    if (!shape.is_string()) throw SchemaError("/kernel/profile/shape: expected a string");
    const std::string s = shape.get<std::string>();
    RadialProfile prof;
    if (s == "gaussian" || s == "exponential") {
      const double scale = p.contains("scale") ? number(p["scale"], "/kernel/profile/scale") : 1.0;
      prof = s == "gaussian" ? RadialProfile::gaussian(scale) : RadialProfile::exponential(scale);
    } else if (s == "table") {
      prof = RadialProfile::table(numbers(field(p, "t", "/kernel/profile"), "/kernel/profile/t"),
                                  numbers(field(p, "theta", "/kernel/profile"),
                                          "/kernel/profile/theta"));
    } else {
      throw SchemaError("/kernel/profile/shape: unknown shape '" + s + "'");
    }
    std::optional<double> cutoff;
    if (j.contains("cutoff")) cutoff = number(j["cutoff"], "/kernel/cutoff");
    return Kernel::radial(std::move(prof), cutoff);
  }
  throw SchemaError("/kernel/kind: unknown kind '" + k + "'");
}

json problem_to_json(const DiscreteProblem& p) {
  return {{"x_space", space_to_json(p.x_space)},
          {"y_space", space_to_json(p.y_space)},
          {"mu", p.mu},
          {"nu", p.nu},
          {"kernel", kernel_to_json(p.kernel)}};
}

DiscreteProblem problem_from_json(const json& j) {
  DiscreteProblem p;
  p.x_space = space_from_json(field(j, "x_space", ""), "/x_space");
  p.y_space = space_from_json(field(j, "y_space", ""), "/y_space");
  p.mu = numbers(field(j, "mu", ""), "/mu");
  p.nu = numbers(field(j, "nu", ""), "/nu");
  p.kernel = kernel_from_json(field(j, "kernel", ""));
  check_schema(p);
  return p;
}

json gaussian_to_json(const gaussian::GaussianProblem& gp) {
  return {{"a", eigen_json(gp.a)}, {"b", eigen_json(gp.b)}, {"c", eigen_json(gp.c)}};
}

gaussian::GaussianProblem gaussian_from_json(const json& j) {
  gaussian::GaussianProblem gp;
  gp.a = gaussian_matrix(field(j, "a", ""), "/a");
  gp.b = gaussian_matrix(field(j, "b", ""), "/b");
  gp.c = gaussian_matrix(field(j, "c", ""), "/c");
  gp.validate();
  return gp;
}

ProblemFormat detect_format(const fs::path& path) {
  return fs::is_directory(path) ? ProblemFormat::csv_bundle : ProblemFormat::json;
}

DiscreteProblem load_problem(const fs::path& path) { return load_problem(path, detect_format(path)); }

DiscreteProblem load_problem(const fs::path& path, ProblemFormat format) {
  if (format == ProblemFormat::json) return problem_from_json(read_json_file(path));
  DiscreteProblem p;
  p.x_space = load_space_csv(path / "x", p.mu);
  p.y_space = load_space_csv(path / "y", p.nu);
  if (fs::exists(path / "kernel.csv")) {
    const auto rows = read_csv(path / "kernel.csv");
    DenseMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols())
        throw ParseError((path / "kernel.csv").string(), i + 1, "", "ragged row");
      for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = rows[i][k];
    }
    p.kernel = Kernel::dense(std::move(m));
  } else if (fs::exists(path / "kernel.json")) {
    p.kernel = kernel_from_json(read_json_file(path / "kernel.json"));
  } else {
    throw SchemaError(path.string() + ": neither kernel.csv nor kernel.json present");
  }
  check_schema(p);
  return p;
}

void save_problem(const DiscreteProblem& p, const fs::path& path, ProblemFormat format) {
  if (format == ProblemFormat::json) {
    write_file(path, problem_to_json(p).dump(2) + "\n");
    return;
  }
  save_space_csv(path / "x", p.x_space, p.mu);
  save_space_csv(path / "y", p.y_space, p.nu);
  if (p.kernel.kind == KernelKind::dense) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < p.kernel.entries.rows(); ++i) {
      const auto r = p.kernel.entries.row(i);
      rows.emplace_back(r.begin(), r.end());
    }
    write_csv_rows(path / "kernel.csv", rows);
  } else {
    write_file(path / "kernel.json", kernel_to_json(p.kernel).dump(2) + "\n");
  }
}

}  // namespace schrodinger
