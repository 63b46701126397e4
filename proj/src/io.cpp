#include "mvg/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mvg/errors.hpp"

namespace mvg {

namespace {

using nlohmann::json;

std::string formatDouble(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, n);
}

void putDouble(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  os.write(bytes, 8);
}

double getDouble(std::istream& is) {
  char bytes[8];
  if (!is.read(bytes, 8)) throw IoError("mvd payload is truncated");
  std::uint64_t bits;
  std::memcpy(&bits, bytes, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

// Storage index of the k-th payload coordinate (SPD payloads are row-major,
// the in-memory matrices column-major).
int storageIndex(const Manifold& m, int k) {
  if (m.kind() != ManifoldKind::Spd) return k;
  const int n = m.param();
  return (k % n) * n + k / n;
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parseDouble(const std::string& s, const std::string& where) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw IoError(where + ": cannot parse '" + s + "' as a number");
  return v;
}

}  // namespace

std::string manifoldTag(const Manifold& m) {
  switch (m.kind()) {
    case ManifoldKind::Euclidean: return "euclidean";
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Sphere2: return "sphere2";
    case ManifoldKind::Spd: return "spd";
  }
  return {};
}

Manifold manifoldFromTag(const std::string& tag, int param) {
  if (tag == "euclidean") return Manifold::euclidean(param);
  if (tag == "circle") return Manifold::circle();
  if (tag == "sphere2") return Manifold::sphere2();
  if (tag == "spd") return Manifold::spd(param);
  throw DomainError("unknown manifold '" + tag + "'");
}

void writeMvd(std::ostream& os, const VertexFunction& f) {
  f.validate();
  const Manifold& m = f.manifold;
  json header;
  header["format"] = "mvd";
  header["version"] = 1;
  header["manifold"] = manifoldTag(m);
  header["params"] = json::object();
  if (m.kind() == ManifoldKind::Euclidean) header["params"]["m"] = m.param();
  if (m.kind() == ManifoldKind::Spd) header["params"]["n"] = m.param();
  header["shape"] = f.shape;
  header["mask"] = !f.mask.empty();
  os << header.dump() << '\n';
  const int dim = m.ambientDim();
  for (int u = 0; u < f.size(); ++u)
    for (int k = 0; k < dim; ++k) putDouble(os, f.values(storageIndex(m, k), u));
  for (auto b : f.mask) os.put(b ? 1 : 0);
  if (!os) throw IoError("failed writing mvd data");
}

VertexFunction readMvd(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("missing mvd header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed mvd header: ") + e.what());
  }
  VertexFunction f;
  try {
    if (header.at("format") != "mvd") throw IoError("not an mvd file");
    if (header.at("version") != 1) throw IoError("unsupported mvd version");
    const std::string tag = header.at("manifold");
    int param = 1;
    const auto& params = header.at("params");
    if (tag == "euclidean") param = params.at("m");
    if (tag == "spd") param = params.at("n");
    const auto shape = header.at("shape").get<std::vector<int>>();
    if (shape.empty()) throw IoError("mvd shape is empty");
    for (int s : shape)
      if (s < 1) throw IoError("mvd shape entries must be positive");
    f = VertexFunction(manifoldFromTag(tag, param), shape);
    if (header.at("mask").get<bool>()) f.mask.assign(f.size(), 1);
  } catch (const json::exception& e) {
    throw IoError(std::string("bad mvd header: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("bad mvd header: ") + e.what());
  }
  const Manifold& m = f.manifold;
  const int dim = m.ambientDim();
  for (int u = 0; u < f.size(); ++u)
    for (int k = 0; k < dim; ++k) f.values(storageIndex(m, k), u) = getDouble(is);
  for (auto& b : f.mask) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw IoError("mvd mask is truncated");
    if (c != 0 && c != 1) throw IoError("mvd mask bytes must be 0 or 1");
    b = static_cast<std::uint8_t>(c);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after mvd data");
  try {
    f.validate();
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid mvd data: ") + e.what());
  }
  return f;
}

void saveMvd(const std::string& path, const VertexFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  writeMvd(os, f);
}

VertexFunction loadMvd(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return readMvd(is);
}

void exportCsv(const std::string& path, const VertexFunction& f) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const int dim = f.manifold.ambientDim();
  for (int u = 0; u < f.size(); ++u) {
    for (int k = 0; k < dim; ++k) {
      if (k) os << ',';
      os << formatDouble(f.values(storageIndex(f.manifold, k), u));
    }
    os << '\n';
  }
  if (!os) throw IoError("failed writing " + path);
}

VertexFunction importCsv(const std::string& path, const std::string& manifold, int param,
                         std::vector<int> shape) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (const auto& cell : splitCsv(line))
      row.push_back(parseDouble(cell, path + ":" + std::to_string(lineNo)));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + " contains no rows");
  if (manifold == "euclidean" && param == 0) param = static_cast<int>(rows[0].size());
  Manifold m = Manifold::circle();
  try {
    m = manifoldFromTag(manifold, param);
  } catch (const DomainError& e) {
    throw IoError(e.what());
  }
  if (shape.empty()) shape = {static_cast<int>(rows.size())};
  VertexFunction f(m, shape);
  if (f.size() != static_cast<int>(rows.size()))
    throw IoError("row count does not match the requested shape");
  for (int u = 0; u < f.size(); ++u) {
    if (static_cast<int>(rows[u].size()) != m.ambientDim())
      throw IoError("row " + std::to_string(u + 1) + " has " + std::to_string(rows[u].size()) +
                    " columns, expected " + std::to_string(m.ambientDim()));
    for (int k = 0; k < m.ambientDim(); ++k) f.values(storageIndex(m, k), u) = rows[u][k];
  }
  try {
    f.validate();
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid csv data: ") + e.what());
  }
  return f;
}

void exportPly(const std::string& path, const VertexFunction& f,
               const std::optional<Eigen::MatrixXd>& positions) {
  const Manifold& m = f.manifold;
  if (positions && (positions->rows() != 3 || positions->cols() != f.size()))
    throw DomainError("positions must be 3 x n");
  std::vector<std::string> names;
  switch (m.kind()) {
    case ManifoldKind::Sphere2: names = {"nx", "ny", "nz"}; break;
    case ManifoldKind::Circle: names = {"angle"}; break;
    case ManifoldKind::Spd:
      for (int i = 0; i < m.param(); ++i)
        for (int j = i; j < m.param(); ++j)
          names.push_back("t" + std::to_string(i) + std::to_string(j));
      break;
    case ManifoldKind::Euclidean:
      for (int i = 0; i < m.param(); ++i) names.push_back("v" + std::to_string(i));
      break;
  }

  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "ply\nformat ascii 1.0\nelement vertex " << f.size() << '\n'
     << "property double x\nproperty double y\nproperty double z\n";
  for (const auto& n : names) os << "property double " << n << '\n';
  os << "property uchar active\nend_header\n";

  const int w = f.shape.size() == 2 ? f.shape[1] : f.size();
  for (int u = 0; u < f.size(); ++u) {
    if (positions) {
      os << formatDouble((*positions)(0, u)) << ' ' << formatDouble((*positions)(1, u)) << ' '
         << formatDouble((*positions)(2, u));
    } else {
      os << (u % w) << ' ' << (u / w) << " 0";
    }
    if (m.kind() == ManifoldKind::Spd) {
      const int n = m.param();
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) os << ' ' << formatDouble(f.values(j * n + i, u));
    } else {
      for (int k = 0; k < m.ambientDim(); ++k) os << ' ' << formatDouble(f.values(k, u));
    }
    os << ' ' << (f.active(u) ? 1 : 0) << '\n';
  }
  if (!os) throw IoError("failed writing " + path);
}

void savePositions(const std::string& path, const Eigen::MatrixXd& positions) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < positions.cols(); ++i) {
    os << i;
    for (Eigen::Index k = 0; k < positions.rows(); ++k)
      os << '\t' << formatDouble(positions(k, i));
    os << '\n';
  }
  if (!os) throw IoError("failed writing " + path);
}

Eigen::MatrixXd loadPositions(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> cols;
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, '\t'))
      vals.push_back(parseDouble(cell, path + ":" + std::to_string(lineNo)));
    if (vals.size() < 2) throw IoError(path + ":" + std::to_string(lineNo) + ": expected idx and coordinates");
    if (vals[0] != static_cast<double>(cols.size()))
      throw IoError(path + ":" + std::to_string(lineNo) + ": indices must be 0, 1, 2, ...");
    vals.erase(vals.begin());
    if (!cols.empty() && vals.size() != cols[0].size())
      throw IoError(path + ":" + std::to_string(lineNo) + ": inconsistent coordinate count");
    cols.push_back(std::move(vals));
  }
  if (cols.empty()) throw IoError(path + " contains no positions");
  Eigen::MatrixXd p(cols[0].size(), cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i)
    for (std::size_t k = 0; k < cols[i].size(); ++k) p(k, i) = cols[i][k];
  return p;
}

}  // namespace mvg
