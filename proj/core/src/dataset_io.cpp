#include "multipde/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace multipde {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("dataset '" + path + "': " + what);
}

std::vector<double> parse_row(const std::string& line, const std::string& path) {
  std::vector<double> out;
  const char* p = line.c_str();
  char* end = nullptr;
  while (*p) {
    const double v = std::strtod(p, &end);
    if (end == p) fail(path, "malformed numeric row: '" + line + "'");
    out.push_back(v);
    p = end;
    while (*p == ',' || *p == ' ') ++p;
  }
  return out;
}

constexpr char kBinaryMagic[8] = {'M', 'P', 'D', 'E', 'B', 'I', 'N', '1'};

void write_string(std::ofstream& os, const std::string& s) {
  const std::uint64_t n = s.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(s.data(), static_cast<std::streamsize>(n));
}

std::string read_string(std::ifstream& is) {
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

void write_doubles(std::ofstream& os, const double* data, std::uint64_t n) {
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& is) {
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

}  // namespace

void save_experiment_csv(const Experiment& exp, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(path, "cannot open for writing");
  os << "# multipde-dataset v1\n";
  os << "# id=" << exp.id << "\n";
  os << "# pde_name=" << exp.pde_name << "\n";
  for (const auto& [k, v] : exp.params) os << "# param." << k << "=" << fmt(v) << "\n";
  os << "# noise_level=" << fmt(exp.noise_level) << "\n";
  os << "# seed=" << exp.seed << "\n";
  os << "# noise_convention=" << exp.noise_convention << "\n";
  os << "grid," << exp.t.size() << "," << exp.x.size() << "\n";
  for (Eigen::Index i = 0; i < exp.t.size(); ++i) os << (i ? "," : "") << fmt(exp.t(i));
  os << "\n";
  for (Eigen::Index j = 0; j < exp.x.size(); ++j) os << (j ? "," : "") << fmt(exp.x(j));
  os << "\n";
  for (Eigen::Index i = 0; i < exp.u.rows(); ++i) {
    for (Eigen::Index j = 0; j < exp.u.cols(); ++j) os << (j ? "," : "") << fmt(exp.u(i, j));
    os << "\n";
  }
  os << "samples," << exp.n_samples() << "\n";
  for (Eigen::Index i = 0; i < exp.n_samples(); ++i)
    os << fmt(exp.samples_xt(i, 0)) << "," << fmt(exp.samples_xt(i, 1)) << ","
       << fmt(exp.samples_u(i)) << "\n";
  if (!os) fail(path, "write error");
}

Experiment load_experiment_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(path, "cannot open");
  Experiment e;
  std::string line;
  int lineno = 0;
  // header comments
  while (std::getline(is, line)) {
    ++lineno;
    if (line.rfind("# ", 0) != 0 && line.rfind("#", 0) != 0) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(2, eq - 2);
    const std::string value = line.substr(eq + 1);
    if (key == "id") e.id = value;
    else if (key == "pde_name") e.pde_name = value;
    else if (key == "noise_level") e.noise_level = std::strtod(value.c_str(), nullptr);
    else if (key == "seed") e.seed = std::strtoull(value.c_str(), nullptr, 10);
    else if (key == "noise_convention") e.noise_convention = value;
    else if (key.rfind("param.", 0) == 0)
      e.params[key.substr(6)] = std::strtod(value.c_str(), nullptr);
  }
  // 'line' now holds the grid header
  Eigen::Index nt = 0, nx = 0;
  if (std::sscanf(line.c_str(), "grid,%td,%td", &nt, &nx) != 2)
    fail(path, "line " + std::to_string(lineno) + ": expected 'grid,nt,nx'");
  auto next = [&]() {
    if (!std::getline(is, line)) fail(path, "line " + std::to_string(lineno) + ": truncated file");
    ++lineno;
  };
  next();
  auto tr = parse_row(line, path);
  next();
  auto xr = parse_row(line, path);
  if (static_cast<Eigen::Index>(tr.size()) != nt || static_cast<Eigen::Index>(xr.size()) != nx)
    fail(path, "grid axis length mismatch");
  e.t = Eigen::Map<Eigen::VectorXd>(tr.data(), nt);
  e.x = Eigen::Map<Eigen::VectorXd>(xr.data(), nx);
  e.u.resize(nt, nx);
  for (Eigen::Index i = 0; i < nt; ++i) {
    next();
    auto row = parse_row(line, path);
    if (static_cast<Eigen::Index>(row.size()) != nx)
      fail(path, "line " + std::to_string(lineno) + ": expected " + std::to_string(nx) +
                     " field values");
    for (Eigen::Index j = 0; j < nx; ++j) e.u(i, j) = row[j];
  }
  next();
  Eigen::Index nsamp = 0;
  if (std::sscanf(line.c_str(), "samples,%td", &nsamp) != 1)
    fail(path, "line " + std::to_string(lineno) + ": expected 'samples,n'");
  e.samples_xt.resize(nsamp, 2);
  e.samples_u.resize(nsamp);
  for (Eigen::Index i = 0; i < nsamp; ++i) {
    next();
    auto row = parse_row(line, path);
    if (row.size() != 3)
      fail(path, "line " + std::to_string(lineno) + ": expected 'x,t,u' sample row");
    e.samples_xt(i, 0) = row[0];
    e.samples_xt(i, 1) = row[1];
    e.samples_u(i) = row[2];
  }
  e.validate();
  return e;
}

void save_experiment_binary(const Experiment& exp, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(path, "cannot open for writing");
  os.write(kBinaryMagic, sizeof(kBinaryMagic));
  write_string(os, exp.id);
  write_string(os, exp.pde_name);
  write_string(os, exp.noise_convention);
  const std::uint64_t np = exp.params.size();
  os.write(reinterpret_cast<const char*>(&np), sizeof(np));
  for (const auto& [k, v] : exp.params) {
    write_string(os, k);
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  os.write(reinterpret_cast<const char*>(&exp.noise_level), sizeof(double));
  os.write(reinterpret_cast<const char*>(&exp.seed), sizeof(exp.seed));
  write_doubles(os, exp.t.data(), exp.t.size());
  write_doubles(os, exp.x.data(), exp.x.size());
  write_doubles(os, exp.u.data(), exp.u.size());
  write_doubles(os, exp.samples_xt.data(), exp.samples_xt.size());
  write_doubles(os, exp.samples_u.data(), exp.samples_u.size());
  if (!os) fail(path, "write error");
}

Experiment load_experiment_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(path, "cannot open");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0) fail(path, "bad magic");
  Experiment e;
  e.id = read_string(is);
  e.pde_name = read_string(is);
  e.noise_convention = read_string(is);
  std::uint64_t np = 0;
  is.read(reinterpret_cast<char*>(&np), sizeof(np));
  for (std::uint64_t i = 0; i < np; ++i) {
    const std::string k = read_string(is);
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    e.params[k] = v;
  }
  is.read(reinterpret_cast<char*>(&e.noise_level), sizeof(double));
  is.read(reinterpret_cast<char*>(&e.seed), sizeof(e.seed));
  auto tv = read_doubles(is);
  auto xv = read_doubles(is);
  auto uv = read_doubles(is);
  auto sxt = read_doubles(is);
  auto su = read_doubles(is);
  if (!is) fail(path, "truncated file");
  e.t = Eigen::Map<Eigen::VectorXd>(tv.data(), static_cast<Eigen::Index>(tv.size()));
  e.x = Eigen::Map<Eigen::VectorXd>(xv.data(), static_cast<Eigen::Index>(xv.size()));
  e.u = Eigen::Map<Eigen::MatrixXd>(uv.data(), e.t.size(), e.x.size());
  e.samples_xt =
      Eigen::Map<Eigen::MatrixXd>(sxt.data(), static_cast<Eigen::Index>(sxt.size() / 2), 2);
  e.samples_u = Eigen::Map<Eigen::VectorXd>(su.data(), static_cast<Eigen::Index>(su.size()));
  e.validate();
  return e;
}

void save_experiment(const Experiment& exp, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    save_experiment_csv(exp, path);
  else
    save_experiment_binary(exp, path);
}

Experiment load_experiment(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return load_experiment_csv(path);
  return load_experiment_binary(path);
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(path, "cannot open");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    const std::streamsize n = is.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace multipde
