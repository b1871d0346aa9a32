#include "wharm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wharm/error.hpp"

namespace wharm {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class F>
std::string rows(std::size_t nodes, int d, int m, const F& coord, const std::vector<double>& data,
                 std::string header) {
  std::string out = std::move(header);
  out.reserve(out.size() + nodes * (d + m + 1) * 24);
  char buf[40];
  for (std::size_t s = 0; s < nodes; ++s) {
    out += std::to_string(s);
    for (int a = 0; a < d; ++a) {
      std::snprintf(buf, sizeof buf, ",%.17g", coord(s, a));
      out += buf;
    }
    for (int c = 0; c < m; ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", data[static_cast<std::size_t>(c) * nodes + s]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string columns(int d, int m) {
  std::string c = "index";
  for (int a = 1; a <= d; ++a) c += ",x" + std::to_string(a);
  for (int k = 1; k <= m; ++k) c += ",u" + std::to_string(k);
  return c;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::MissingArtifacts, "missing file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw Error(ErrorCode::InvalidConfig, "duplicate key '" + key + "'");
  }
  return kv;
}

std::string field_to_text(const Field& u) {
  const HalfSpaceGrid& g = *u.grid;
  std::string header = "# wharm-field v1 kind=halfspace d=" + std::to_string(g.d()) + " m=" + std::to_string(u.m) +
                       " n=" + std::to_string(g.n()) + " L=" + format_double(g.L()) + " H=" + format_double(g.H()) +
                       " sigma=" + format_double(g.sigma()) + " columns=" + columns(g.d(), u.m) + "\n";
  const std::size_t plane = g.plane();
  auto coord = [&](std::size_t s, int a) {
    if (a == 2) return g.z()[s / plane];
    const std::size_t r = s % plane;
    return g.x(static_cast<int>(a == 0 ? r % g.n() : r / g.n()));
  };
  return rows(u.nodes(), g.d(), u.m, coord, u.data, std::move(header));
}

std::string field_to_text(const BoxField& u) {
  const BoxGrid& g = *u.grid;
  std::string header = "# wharm-field v1 kind=box d=" + std::to_string(g.d()) + " m=" + std::to_string(u.m) +
                       " n=" + std::to_string(g.n()) + " columns=" + columns(g.d(), u.m) + "\n";
  auto coord = [&](std::size_t s, int a) { return g.coord(s, a); };
  return rows(u.nodes(), g.d(), u.m, coord, u.data, std::move(header));
}

LoadedField field_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string header;
  std::getline(is, header);
  const std::string magic = "# wharm-field v1 ";
  if (header.rfind(magic, 0) != 0) throw Error(ErrorCode::InvalidArgument, "not a field file");
  std::map<std::string, std::string> h;
  std::istringstream hs(header.substr(magic.size()));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) h[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const char* k) {
    if (!h.count(k)) throw Error(ErrorCode::InvalidArgument, std::string("field header lacks ") + k);
    return h[k];
  };
  LoadedField out;
  out.kind = need("kind");
  const int d = std::stoi(need("d")), m = std::stoi(need("m")), n = std::stoi(need("n"));
  std::vector<double>* data = nullptr;
  std::size_t nodes = 0;
  if (out.kind == "halfspace") {
    auto grid = std::make_shared<const HalfSpaceGrid>(n, std::stod(need("L")), std::stod(need("H")),
                                                      std::stod(need("sigma")), d);
    out.half = Field(grid, m);
    data = &out.half->data;
    nodes = grid->nodes();
  } else if (out.kind == "box") {
    auto grid = std::make_shared<const BoxGrid>(d, n);
    out.box = BoxField(grid, m);
    data = &out.box->data;
    nodes = grid->nodes();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown field kind " + out.kind);
  }
  std::string line;
  std::size_t count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    const std::size_t s = std::stoull(cell);
    if (s >= nodes) throw Error(ErrorCode::InvalidArgument, "field row index out of range");
    for (int a = 0; a < d; ++a) std::getline(ls, cell, ',');
    for (int c = 0; c < m; ++c) {
      if (!std::getline(ls, cell, ',')) throw Error(ErrorCode::InvalidArgument, "short field row");
      (*data)[static_cast<std::size_t>(c) * nodes + s] = std::stod(cell);
    }
    ++count;
  }
  if (count != nodes) throw Error(ErrorCode::InvalidArgument, "field file has the wrong number of rows");
  return out;
}

}  // namespace wharm
