#include "lpsketch/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace lpsketch {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& msg) {
  throw DataError(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& path, std::size_t line, const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    fail(path, line, "bad number '" + tok + "'");
  return v;
}

int parse_label(const std::string& path, std::size_t line, const std::string& tok) {
  const double v = parse_real(path, line, tok);
  if (v != std::floor(v)) fail(path, line, "label '" + tok + "' is not an integer");
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

struct ParsedRows {
  std::vector<DataVector> rows;
  std::vector<int> labels;
  bool has_labels = false;
};

ParsedRows load_rows(const DatasetFile& f) {
  std::ifstream is(f.path);
  if (!is) throw DataError(f.path + ": cannot open file");
  ParsedRows out;
  std::string line;
  std::size_t lineno = 0;

  if (f.format == "dense-csv") {
    out.has_labels = f.labeled;
    std::size_t dim = f.dim;
    while (std::getline(is, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      auto toks = split(line, ',');
      std::size_t first = 0;
      if (f.labeled) {
        if (toks.size() < 2) fail(f.path, lineno, "expected a label and at least one value");
        out.labels.push_back(parse_label(f.path, lineno, toks[0]));
        first = 1;
      }
      const std::size_t ncol = toks.size() - first;
      if (dim == 0) dim = ncol;
      if (ncol != dim)
        fail(f.path, lineno,
             "expected " + std::to_string(dim) + " values, got " + std::to_string(ncol));
      std::vector<double> vals(ncol);
      for (std::size_t i = 0; i < ncol; ++i)
        vals[i] = parse_real(f.path, lineno, toks[first + i]);
      out.rows.push_back(DataVector::dense(std::move(vals)));
    }
    if (out.rows.empty()) throw DataError(f.path + ": no data rows");
    return out;
  }

  if (f.format == "svmlight") {
    if (f.dim == 0) throw DataError(f.path + ": svmlight input requires an explicit dim");
    out.has_labels = true;
    while (std::getline(is, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      auto toks = split_ws(line);
      out.labels.push_back(parse_label(f.path, lineno, toks[0]));
      std::vector<std::uint32_t> idx;
      std::vector<double> val;
      long long prev = -1;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        const auto colon = toks[i].find(':');
        if (colon == std::string::npos)
          fail(f.path, lineno, "expected idx:val, got '" + toks[i] + "'");
        char* end = nullptr;
        const std::string istr = toks[i].substr(0, colon);
        const long long one_based = std::strtoll(istr.c_str(), &end, 10);
        if (istr.empty() || end != istr.c_str() + istr.size() || one_based < 1)
          fail(f.path, lineno, "bad index '" + istr + "'");
        if (static_cast<std::size_t>(one_based) > f.dim)
          fail(f.path, lineno, "index " + istr + " exceeds dim " + std::to_string(f.dim));
        if (one_based - 1 <= prev) fail(f.path, lineno, "indices must be strictly ascending");
        prev = one_based - 1;
        const double v = parse_real(f.path, lineno, toks[i].substr(colon + 1));
        if (v == 0.0) continue;
        idx.push_back(static_cast<std::uint32_t>(one_based - 1));
        val.push_back(v);
      }
      out.rows.push_back(DataVector::sparse(f.dim, std::move(idx), std::move(val)));
    }
    if (out.rows.empty()) throw DataError(f.path + ": no data rows");
    return out;
  }

  throw DataError(f.path + ": unknown format '" + f.format + "'");
}

}  // namespace

LabeledDataset load_labeled(const DatasetFile& f) {
  ParsedRows parsed = load_rows(f);
  if (!parsed.has_labels) throw DataError(f.path + ": dataset has no labels");
  LabeledDataset ds;
  ds.rows = std::move(parsed.rows);
  ds.labels = std::move(parsed.labels);
  return ds;
}

std::vector<DataVector> load_vectors(const DatasetFile& f) {
  return load_rows(f).rows;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string scheme_token(Scheme s) { return s == Scheme::one_matrix ? "1p" : "3p"; }

}  // namespace

void save_sketches(std::ostream& os, const std::vector<Sketch>& sketches) {
  if (sketches.empty()) throw std::invalid_argument("save_sketches: nothing to save");
  const ProjectionSpec& spec = sketches.front().spec();
  const int max_power = sketches.front().max_power();
  for (const Sketch& s : sketches) {
    if (!(s.spec() == spec) || s.max_power() != max_power)
      throw std::invalid_argument("save_sketches: sketches disagree on spec or max power");
    if (s.vector_id().empty() ||
        s.vector_id().find_first_of(" \t\r\n") != std::string::npos)
      throw std::invalid_argument("save_sketches: vector ids must be nonempty without spaces");
  }
  for (std::size_t i = 0; i < sketches.size(); ++i)
    for (std::size_t j = i + 1; j < sketches.size(); ++j)
      if (sketches[i].vector_id() == sketches[j].vector_id())
        throw std::invalid_argument("save_sketches: duplicate vector id '" +
                                    sketches[i].vector_id() + "'");

  os << "lpsketch v1 seed=" << spec.seed << " k=" << spec.k
     << " scheme=" << scheme_token(spec.scheme) << " dist=" << spec.dist.token()
     << " D=" << spec.dim << " maxpower=" << max_power << "\n";
  for (const Sketch& s : sketches) {
    for (int r = 1; r <= max_power; ++r) {
      os << s.vector_id() << " " << r;
      for (const double v : s.power(r)) os << " " << format_real(v);
      os << "\n";
    }
  }
  for (const Sketch& s : sketches) {
    os << s.vector_id() << " margins";
    for (int q = 2; q <= 2 * max_power; q += 2) os << " " << format_real(s.margin(q));
    os << "\n";
  }
}

void save_sketches(const std::string& path, const std::vector<Sketch>& sketches) {
  std::ofstream os(path);
  if (!os) throw DataError(path + ": cannot open file for writing");
  save_sketches(os, sketches);
  if (!os) throw DataError(path + ": write failed");
}

std::vector<Sketch> load_sketches(std::istream& is, Role role) {
  const std::string where = "sketch stream";
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw DataError(where + ": empty input");
  ++lineno;
  line = strip_cr(line);
  auto head = split_ws(line);
  if (head.size() != 8 || head[0] != "lpsketch" || head[1] != "v1")
    fail(where, lineno, "bad header");
  ProjectionSpec spec;
  int max_power = 0;
  for (std::size_t i = 2; i < head.size(); ++i) {
    const auto eq = head[i].find('=');
    if (eq == std::string::npos) fail(where, lineno, "bad header field '" + head[i] + "'");
    const std::string key = head[i].substr(0, eq);
    const std::string val = head[i].substr(eq + 1);
    char* end = nullptr;
    if (key == "seed") {
      spec.seed = std::strtoull(val.c_str(), &end, 10);
      if (val.empty() || end != val.c_str() + val.size()) fail(where, lineno, "bad seed");
    } else if (key == "k") {
      spec.k = static_cast<std::uint32_t>(std::strtoul(val.c_str(), &end, 10));
      if (val.empty() || end != val.c_str() + val.size()) fail(where, lineno, "bad k");
    } else if (key == "scheme") {
      if (val == "1p")
        spec.scheme = Scheme::one_matrix;
      else if (val == "3p")
        spec.scheme = Scheme::three_matrix;
      else
        fail(where, lineno, "bad scheme '" + val + "'");
    } else if (key == "dist") {
      try {
        spec.dist = Distribution::parse(val);
      } catch (const std::invalid_argument& e) {
        fail(where, lineno, e.what());
      }
    } else if (key == "D") {
      spec.dim = std::strtoull(val.c_str(), &end, 10);
      if (val.empty() || end != val.c_str() + val.size()) fail(where, lineno, "bad D");
    } else if (key == "maxpower") {
      max_power = static_cast<int>(std::strtol(val.c_str(), &end, 10));
      if (val.empty() || end != val.c_str() + val.size()) fail(where, lineno, "bad maxpower");
    } else {
      fail(where, lineno, "unknown header field '" + key + "'");
    }
  }
  if (max_power != 3 && max_power != 5) fail(where, lineno, "maxpower must be 3 or 5");
  if (spec.k == 0) fail(where, lineno, "k must be positive");

  struct Partial {
    std::vector<std::vector<double>> powers;
    std::vector<double> margins;
    std::vector<bool> have_power;
    bool have_margins = false;
  };
  std::vector<std::string> order;
  std::map<std::string, Partial> parts;

  while (std::getline(is, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto toks = split_ws(line);
    if (toks.size() < 2) fail(where, lineno, "truncated record");
    const std::string& id = toks[0];
    auto it = parts.find(id);
    if (it == parts.end()) {
      order.push_back(id);
      Partial p;
      p.powers.assign(static_cast<std::size_t>(max_power), {});
      p.have_power.assign(static_cast<std::size_t>(max_power), false);
      it = parts.emplace(id, std::move(p)).first;
    }
    Partial& p = it->second;
    if (toks[1] == "margins") {
      if (p.have_margins) fail(where, lineno, "duplicate margins for id '" + id + "'");
      if (toks.size() != 2 + static_cast<std::size_t>(max_power))
        fail(where, lineno, "expected " + std::to_string(max_power) + " margin values");
      for (std::size_t i = 2; i < toks.size(); ++i)
        p.margins.push_back(parse_real(where, lineno, toks[i]));
      p.have_margins = true;
    } else {
      char* end = nullptr;
      const long r = std::strtol(toks[1].c_str(), &end, 10);
      if (end != toks[1].c_str() + toks[1].size() || r < 1 || r > max_power)
        fail(where, lineno, "bad power '" + toks[1] + "'");
      if (p.have_power[static_cast<std::size_t>(r - 1)])
        fail(where, lineno, "duplicate power " + toks[1] + " for id '" + id + "'");
      if (toks.size() != 2 + static_cast<std::size_t>(spec.k))
        fail(where, lineno, "expected " + std::to_string(spec.k) + " values");
      std::vector<double> img(spec.k);
      for (std::size_t i = 0; i < spec.k; ++i)
        img[i] = parse_real(where, lineno, toks[2 + i]);
      p.powers[static_cast<std::size_t>(r - 1)] = std::move(img);
      p.have_power[static_cast<std::size_t>(r - 1)] = true;
    }
  }

  std::vector<Sketch> out;
  for (const std::string& id : order) {
    Partial& p = parts.at(id);
    for (int r = 1; r <= max_power; ++r)
      if (!p.have_power[static_cast<std::size_t>(r - 1)])
        throw DataError(where + ": missing power " + std::to_string(r) + " for id '" + id +
                        "'");
    if (!p.have_margins) throw DataError(where + ": missing margins for id '" + id + "'");
    try {
      out.emplace_back(id, spec, role, max_power, std::move(p.powers), std::move(p.margins));
    } catch (const std::invalid_argument& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  if (out.empty()) throw DataError(where + ": no sketches in input");
  return out;
}

std::vector<Sketch> load_sketches(const std::string& path, Role role) {
  std::ifstream is(path);
  if (!is) throw DataError(path + ": cannot open file");
  try {
    return load_sketches(is, role);
  } catch (const DataError& e) {
    const std::string msg = e.what();
    const std::string anon = "sketch stream";
    if (msg.rfind(anon, 0) == 0) throw DataError(path + msg.substr(anon.size()));
    throw;
  }
}

void write_mse_csv(std::ostream& os, const std::vector<MseRow>& rows) {
  os << "estimator,k,trials,empirical_mse,theoretical_var_norm,bias_sq_norm\n";
  for (const MseRow& r : rows) {
    os << r.estimator_id << "," << r.k << "," << r.trials << ",";
    if (r.empirical_mse) os << format_real(*r.empirical_mse);
    os << ",";
    if (r.theoretical_norm_var) os << format_real(*r.theoretical_norm_var);
    os << "," << format_real(r.bias_sq_norm) << "\n";
  }
}

void write_knn_csv(std::ostream& os, const std::vector<KnnResult>& rows) {
  os << "m,p,distance_source,k,seed_repeats,mean_error,std_error\n";
  for (const KnnResult& r : rows) {
    os << r.m << "," << r.p << "," << r.distance_source << "," << r.k << ","
       << r.seed_repeats << "," << format_real(r.mean_error) << ","
       << format_real(r.std_error) << "\n";
  }
}

void write_estimate_csv(std::ostream& os, const Estimate& e) {
  os << "estimator,p,k,value,predicted_variance\n";
  os << e.estimator_id << "," << e.p << "," << e.k << "," << format_real(e.value) << ",";
  if (e.predicted_variance) os << format_real(*e.predicted_variance);
  os << "\n";
}

void write_moments_csv(std::ostream& os, const MomentTable& m) {
  os << "stat,value\n";
  os << "dim," << m.dim() << "\n";
  os << "nnz_x," << m.nnz_x() << "\n";
  os << "nnz_y," << m.nnz_y() << "\n";
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6 && a + b <= 8; ++b)
      os << "s_" << a << "_" << b << "," << format_real(m.s(a, b)) << "\n";
  for (int p = 2; p <= 8; p += 2)
    os << "diff_pow_" << p << "," << format_real(m.diff_pow(p)) << "\n";
  const double denom = m.s(4, 0) + m.s(0, 4);
  if (denom > 0.0) os << "beta4," << format_real(1.0 - m.diff_pow(4) / denom) << "\n";
}

}  // namespace lpsketch
