#include "vapors/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "vapors/errors.hpp"

namespace vapors::io {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw DataError("not a number: '" + std::string(s) + "'");
  return v;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

long parse_long(std::string_view s) {
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw DataError("not an integer: '" + std::string(s) + "'");
  return v;
}

bool has_space(const std::string& s) {
  return s.find_first_of(" \t\r\n") != std::string::npos;
}

}  // namespace

// ---------------------------------------------------------------- samples

void write_samples(std::ostream& out, const SampleSet& set) {
  const std::size_t d = set.space.dim();
  out << "vapors-samples " << kSampleFormatVersion << '\n';
  out << "dim " << d << '\n';
  out << "bounds";
  for (const auto& b : set.space.bounds()) out << ' ' << format_double(b.lo) << ' ' << format_double(b.hi);
  out << '\n';
  for (const auto& [key, value] : set.provenance) {
    if (key.empty() || has_space(key) || value.find('\n') != std::string::npos)
      throw InvalidArgument("provenance key/value cannot be written: " + key);
    out << "meta " << key << ' ' << value << '\n';
  }
  out << "data\n";
  for (const auto& x : set.samples) {
    if (x.dim() != d) throw InvalidArgument("sample dimension differs from the parameter space");
    out << x.k();
    for (double v : x.coords()) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite sample value");
      out << ' ' << format_double(v);
    }
    out << '\n';
  }
}

void write_samples(const std::filesystem::path& path, const SampleSet& set) {
  auto out = open_output(path);
  write_samples(out, set);
  if (!out) throw DataError("write failed: " + path.string());
}

SampleReader::SampleReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {
  std::string line;
  if (!next_line(line)) fail("empty file");
  auto tok = split_ws(line);
  if (tok.size() != 2 || tok[0] != "vapors-samples") fail("missing 'vapors-samples' header");
  const long version = parse_long(tok[1]);
  if (version != kSampleFormatVersion)
    fail("unsupported format version " + std::to_string(version) + " (expected " +
         std::to_string(kSampleFormatVersion) + ")");

  if (!next_line(line)) fail("missing 'dim' line");
  tok = split_ws(line);
  if (tok.size() != 2 || tok[0] != "dim") fail("expected 'dim <d>'");
  const long d = parse_long(tok[1]);
  if (d < 1) fail("dimension must be positive");

  if (!next_line(line)) fail("missing 'bounds' line");
  tok = split_ws(line);
  if (tok.empty() || tok[0] != "bounds" || tok.size() != 1 + 2 * static_cast<std::size_t>(d))
    fail("expected 'bounds' followed by " + std::to_string(2 * d) + " numbers");
  std::vector<Interval> bounds;
  for (long c = 0; c < d; ++c) {
    Interval b;
    try {
      b.lo = parse_double(tok[1 + 2 * c]);
      b.hi = parse_double(tok[2 + 2 * c]);
    } catch (const DataError& e) {
      fail(e.what());
    }
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) fail("invalid bounds");
    bounds.push_back(b);
  }
  space_ = ParamSpace(std::move(bounds));

  while (true) {
    if (!next_line(line)) fail("missing 'data' line");
    if (line == "data" || line == "data\r") break;
    if (line.rfind("meta ", 0) != 0) fail("expected 'meta <key> <value>' or 'data'");
    std::string rest = line.substr(5);
    if (!rest.empty() && rest.back() == '\r') rest.pop_back();
    const auto sp = rest.find(' ');
    if (sp == 0 || rest.empty()) fail("empty meta key");
    if (sp == std::string::npos)
      provenance_[rest] = "";
    else
      provenance_[rest.substr(0, sp)] = rest.substr(sp + 1);
  }
}

bool SampleReader::next_line(std::string& line) {
  if (!std::getline(in_, line)) return false;
  ++line_;
  // Every line the writer emits is terminated; a bare last line means the
  // file was cut short.
  if (in_.eof()) fail("incomplete record (file truncated?)");
  return true;
}

void SampleReader::fail(const std::string& what) const {
  throw DataError(source_ + ":" + std::to_string(line_) + ": " + what);
}

bool SampleReader::next(VariableDimSample& sample) {
  const std::size_t d = space_.dim();
  std::string line;
  while (true) {
    if (!next_line(line)) return false;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    long k = 0;
    try {
      k = parse_long(tok[0]);
    } catch (const DataError& e) {
      fail(std::string("record: ") + e.what());
    }
    if (k < 0) fail("record: negative component count");
    const std::size_t want = static_cast<std::size_t>(k) * d;
    if (tok.size() - 1 != want)
      fail("record: k = " + std::to_string(k) + " needs " + std::to_string(want) + " values, found " +
           std::to_string(tok.size() - 1));
    std::vector<double> coords(want);
    for (std::size_t i = 0; i < want; ++i) {
      try {
        coords[i] = parse_double(tok[i + 1]);
      } catch (const DataError& e) {
        fail(std::string("record: ") + e.what());
      }
      if (!std::isfinite(coords[i])) fail("record: non-finite value");
    }
    VariableDimSample x(d, std::move(coords));
    bool inside = true;
    for (std::size_t j = 0; j < x.k() && inside; ++j) inside = space_.contains(x.component(j));
    if (!inside) {
      ++rejected_;
      continue;
    }
    sample = std::move(x);
    return true;
  }
}

namespace {

SampleSet read_all(SampleReader& reader, std::size_t* rejected) {
  SampleSet set;
  set.space = reader.space();
  set.provenance = reader.provenance();
  VariableDimSample x;
  while (reader.next(x)) set.samples.push_back(std::move(x));
  if (rejected) *rejected = reader.rejected();
  return set;
}

}  // namespace

SampleSet read_samples(std::istream& in, std::size_t* rejected) {
  SampleReader reader(in);
  return read_all(reader, rejected);
}

SampleSet read_samples(const std::filesystem::path& path, std::size_t* rejected) {
  auto in = open_input(path);
  SampleReader reader(in, path.string());
  return read_all(reader, rejected);
}

// ---------------------------------------------------------------- JSON

namespace {

// Non-finite reals have no JSON literal; they are written as strings.
json real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json reals(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

double as_real(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
  }
  throw DataError(what + ": expected a number");
}

std::vector<double> as_reals(const json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(as_real(x, what));
  return out;
}

json interval_json(const Interval& b) { return json::array({real(b.lo), real(b.hi)}); }

json box_json(const std::vector<Interval>& box) {
  json a = json::array();
  for (const auto& b : box) a.push_back(interval_json(b));
  return a;
}

Interval interval_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw DataError(what + ": expected [lo, hi]");
  return {as_real(j[0], what), as_real(j[1], what)};
}

json histogram_json(const diag::Histogram& h) {
  return {{"lo", real(h.lo)}, {"hi", real(h.hi)}, {"heights", reals(h.heights)}};
}

json curve_json(const diag::Curve& c) { return {{"x", reals(c.x)}, {"y", reals(c.y)}}; }

}  // namespace

json to_json(const ParamSpace& space) { return box_json(space.bounds()); }

ParamSpace space_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DataError("space: expected a non-empty array of [lo, hi]");
  std::vector<Interval> bounds;
  for (const auto& b : j) {
    const Interval iv = interval_from(b, "space");
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) throw DataError("space: invalid bounds");
    bounds.push_back(iv);
  }
  return ParamSpace(std::move(bounds));
}

json to_json(const ApproxModel& model) {
  json comps = json::array();
  for (const auto& c : model.components)
    comps.push_back({{"mu", reals(c.mu)}, {"sigma2", reals(c.sigma2)}, {"pi", real(c.pi)}});
  return {{"space", to_json(model.space)}, {"components", comps}, {"lambda", real(model.lambda)}};
}

ApproxModel model_from_json(const json& j) {
  if (!j.is_object()) throw DataError("model: expected an object");
  for (const char* key : {"space", "components", "lambda"})
    if (!j.contains(key)) throw DataError(std::string("model: missing '") + key + "'");
  ApproxModel m;
  m.space = space_from_json(j.at("space"));
  m.lambda = as_real(j.at("lambda"), "model.lambda");
  if (!j.at("components").is_array()) throw DataError("model.components: expected an array");
  for (const auto& c : j.at("components")) {
    if (!c.is_object() || !c.contains("mu") || !c.contains("sigma2") || !c.contains("pi"))
      throw DataError("model.components: each needs mu, sigma2 and pi");
    GaussianComponent g;
    g.mu = as_reals(c.at("mu"), "component.mu");
    g.sigma2 = as_reals(c.at("sigma2"), "component.sigma2");
    g.pi = as_real(c.at("pi"), "component.pi");
    m.components.push_back(std::move(g));
  }
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  return m;
}

json to_json(const FitResult& result) {
  json pruned = json::array();
  for (const auto& p : result.pruned)
    pruned.push_back({{"iteration", p.iteration}, {"label", p.label}, {"allocated", p.allocated}});
  json table = json::array();
  for (const auto& c : result.model.components) {
    std::vector<double> s;
    for (double v : c.sigma2) s.push_back(std::sqrt(v));
    table.push_back({{"mu", reals(c.mu)}, {"s", reals(s)}, {"pi", real(c.pi)}});
  }
  return {{"model", to_json(result.model)},
          {"table", table},
          {"initial_L", result.initial_L},
          {"final_L", result.model.L()},
          {"averaged_iterations", result.averaged_iterations},
          {"iterations", result.trace.iterations.size()},
          {"pruned", pruned},
          {"log", result.log}};
}

json to_json(const diag::SummaryReport& report) {
  json comps = json::array();
  for (const auto& c : report.components) comps.push_back({{"mu", reals(c.mu)}, {"s", reals(c.s)}, {"pi", real(c.pi)}});
  json intervals = json::array();
  for (const auto& iv : report.intervals)
    intervals.push_back({{"box", box_json(iv.box)}, {"model", real(iv.model)}, {"empirical", real(iv.empirical)}});
  json normalized = json::array();
  for (const auto& c : report.normalized) normalized.push_back(curve_json(c));
  json j = {{"components", comps},
            {"lambda", real(report.lambda)},
            {"approx_k", {{"p", reals(report.approx_k.p)}, {"tail_mass", real(report.approx_k.tail_mass)}}},
            {"empirical_k", reals(report.empirical_k)},
            {"intervals", intervals},
            {"residual_count", report.residual_count},
            {"residual_hist", histogram_json(report.residual_hist)},
            {"bma_hist", histogram_json(report.bma_hist)},
            {"intensity", curve_json(report.intensity)},
            {"normalized", normalized}};
  if (report.error_db_bma) j["error_db_bma"] = real(*report.error_db_bma);
  if (report.error_db_model) j["error_db_model"] = real(*report.error_db_model);
  return j;
}

// ---------------------------------------------------------------- text/CSV

void write_allocations(std::ostream& out, const std::vector<AllocationVector>& allocations) {
  for (const auto& z : allocations) {
    for (std::size_t i = 0; i < z.labels.size(); ++i) out << (i ? " " : "") << z.labels[i];
    out << '\n';
  }
}

std::vector<AllocationVector> read_allocations(std::istream& in) {
  std::vector<AllocationVector> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    AllocationVector z;
    for (auto tok : split_ws(line)) {
      try {
        z.labels.push_back(static_cast<int>(parse_long(tok)));
      } catch (const DataError& e) {
        throw DataError("allocations:" + std::to_string(n) + ": " + e.what());
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

void write_trace_csv(std::ostream& out, const FitTrace& trace) {
  out << "iteration,L,lambda,criterion,outliers,acceptance_rate,pi,allocated\n";
  for (std::size_t t = 0; t < trace.iterations.size(); ++t) {
    const auto& r = trace.iterations[t];
    out << t + 1 << ',' << r.model.L() << ',' << format_double(r.model.lambda) << ',' << format_double(r.criterion)
        << ',' << r.outliers << ',' << format_double(r.acceptance_rate) << ',';
    for (int l = 0; l < r.model.L(); ++l) out << (l ? ";" : "") << format_double(r.model.components[l].pi);
    out << ',';
    for (std::size_t l = 0; l < r.allocated.size(); ++l) out << (l ? ";" : "") << r.allocated[l];
    out << '\n';
  }
}

namespace {

void write_histogram_csv(const std::filesystem::path& path, const diag::Histogram& h) {
  auto out = open_output(path);
  out << "center,height\n";
  for (std::size_t i = 0; i < h.heights.size(); ++i)
    out << format_double(h.center(i)) << ',' << format_double(h.heights[i]) << '\n';
}

}  // namespace

void write_report_csvs(const std::filesystem::path& dir, const diag::SummaryReport& report) {
  std::filesystem::create_directories(dir);
  write_histogram_csv(dir / "bma_histogram.csv", report.bma_hist);
  write_histogram_csv(dir / "residual_histogram.csv", report.residual_hist);
  {
    auto out = open_output(dir / "intensity.csv");
    out << "theta,h\n";
    for (std::size_t i = 0; i < report.intensity.x.size(); ++i)
      out << format_double(report.intensity.x[i]) << ',' << format_double(report.intensity.y[i]) << '\n';
  }
  {
    auto out = open_output(dir / "components.csv");
    out << "theta";
    for (std::size_t l = 0; l < report.normalized.size(); ++l) out << ",component_" << l + 1;
    out << '\n';
    const std::size_t n = report.normalized.empty() ? 0 : report.normalized.front().x.size();
    for (std::size_t i = 0; i < n; ++i) {
      out << format_double(report.normalized.front().x[i]);
      for (const auto& c : report.normalized) out << ',' << format_double(c.y[i]);
      out << '\n';
    }
  }
  {
    auto out = open_output(dir / "posterior_k.csv");
    out << "k,empirical,approx\n";
    const std::size_t n = std::max(report.empirical_k.size(), report.approx_k.p.size());
    for (std::size_t k = 0; k < n; ++k) {
      const double e = k < report.empirical_k.size() ? report.empirical_k[k] : 0.0;
      const double a = k < report.approx_k.p.size() ? report.approx_k.p[k] : 0.0;
      out << k << ',' << format_double(e) << ',' << format_double(a) << '\n';
    }
  }
}

void write_signal_csv(std::ostream& out, const std::vector<double>& y) {
  for (double v : y) out << format_double(v) << '\n';
}

std::vector<double> read_signal_csv(std::istream& in) {
  std::vector<double> y;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 1) throw DataError("signal:" + std::to_string(n) + ": expected one value per line");
    double v = 0.0;
    try {
      v = parse_double(tok[0]);
    } catch (const DataError& e) {
      throw DataError("signal:" + std::to_string(n) + ": " + e.what());
    }
    if (!std::isfinite(v)) throw DataError("signal:" + std::to_string(n) + ": non-finite value");
    y.push_back(v);
  }
  return y;
}

void write_counts_csv(std::ostream& out, const std::vector<long>& n) {
  out << "bin,count\n";
  for (std::size_t i = 0; i < n.size(); ++i) out << i << ',' << n[i] << '\n';
}

std::vector<long> read_counts_csv(std::istream& in) {
  std::vector<long> n;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (ln == 1 && line == "bin,count")) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw DataError("expected 'bin,count'");
      const long bin = parse_long(std::string_view(line).substr(0, comma));
      const long count = parse_long(std::string_view(line).substr(comma + 1));
      if (bin != static_cast<long>(n.size())) throw DataError("bins must be consecutive from 0");
      if (count < 0) throw DataError("negative count");
      n.push_back(count);
    } catch (const DataError& e) {
      throw DataError("counts:" + std::to_string(ln) + ": " + e.what());
    }
  }
  return n;
}

// ---------------------------------------------------------------- config

namespace {

// Reads fields out of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw DataError(name_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& value) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        value = as_real(v, name_ + "." + key);
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw DataError("expected true or false");
        value = v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw DataError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned())
            value = v.get<T>();
          else if (v.get<long long>() >= 0)
            value = static_cast<T>(v.get<long long>());
          else
            throw DataError("expected a nonnegative integer");
        } else {
          value = v.get<T>();
        }
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        value = as_reals(v, name_ + "." + key);
      } else {
        static_assert(sizeof(T) == 0, "unsupported field type");
      }
    } catch (const json::exception& e) {
      throw DataError(name_ + "." + key + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(name_ + "." + key + ": " + e.what());
    }
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string name(const char* key) const { return name_ + "." + key; }

  void finish() const {
    for (const auto& [key, v] : j_.items())
      if (!seen_.count(key)) throw DataError(name_ + ": unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

json muons_json(const std::vector<auger::MuonParams>& muons) {
  json a = json::array();
  for (const auto& m : muons) a.push_back({real(m.t), real(m.a)});
  return a;
}

std::vector<auger::MuonParams> muons_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array of [t, a]");
  std::vector<auger::MuonParams> out;
  for (const auto& m : j) {
    const Interval p = interval_from(m, what);
    out.push_back({p.lo, p.hi});
  }
  return out;
}

const char* init_rule_name(InitRule r) { return r == InitRule::threshold ? "threshold" : "percentile"; }

InitRule init_rule_from(const json& j) {
  if (j == "threshold") return InitRule::threshold;
  if (j == "percentile") return InitRule::percentile;
  throw DataError("fit.init_rule: expected 'percentile' or 'threshold'");
}

const char* estimator_name(LocationScaleEstimator e) {
  return e == LocationScaleEstimator::moments ? "moments" : "robust";
}

LocationScaleEstimator estimator_from(const json& j) {
  if (j == "robust") return LocationScaleEstimator::robust;
  if (j == "moments") return LocationScaleEstimator::moments;
  throw DataError("fit.estimator: expected 'robust' or 'moments'");
}

}  // namespace

json to_json(const RunConfig& c) {
  const auto& ss = c.sin_signal;
  const auto& sc = c.sin_chain;
  const auto& as = c.auger_signal;
  const auto& ac = c.auger_chain;
  const auto& f = c.fit;
  json j;
  j["seed"] = c.seed;
  j["sin_signal"] = {{"N", ss.N},
                     {"omega", reals(ss.omega)},
                     {"energy", reals(ss.energy)},
                     {"phase", reals(ss.phase)},
                     {"snr_db", real(ss.snr_db)}};
  j["sin_chain"] = {{"iterations", sc.iterations},
                    {"burn_in", sc.burn_in},
                    {"thinning", sc.thinning},
                    {"k_max", sc.k_max},
                    {"alpha_delta", real(sc.alpha_delta)},
                    {"beta_delta", real(sc.beta_delta)},
                    {"alpha_Lambda", real(sc.alpha_Lambda)},
                    {"beta_Lambda", real(sc.beta_Lambda)},
                    {"sample_delta2", sc.sample_delta2},
                    {"sample_Lambda", sc.sample_Lambda},
                    {"initial_delta2", real(sc.initial_delta2)},
                    {"initial_Lambda", real(sc.initial_Lambda)},
                    {"initial_omega", reals(sc.initial_omega)},
                    {"p_birth", real(sc.p_birth)},
                    {"p_death", real(sc.p_death)},
                    {"rw_step", real(sc.rw_step)},
                    {"p_independent_update", real(sc.p_independent_update)}};
  j["auger_signal"] = {{"muons", muons_json(as.muons)},
                       {"bins", as.geometry.N},
                       {"t0", real(as.geometry.t0)},
                       {"t_delta", real(as.geometry.t_delta)}};
  j["auger_chain"] = {{"iterations", ac.iterations},
                      {"burn_in", ac.burn_in},
                      {"thinning", ac.thinning},
                      {"k_max", ac.k_max},
                      {"Lambda_mu", real(ac.Lambda_mu)},
                      {"alpha_a", real(ac.alpha_a)},
                      {"beta_a", real(ac.beta_a)},
                      {"a_max", real(ac.a_max)},
                      {"rise_time", real(ac.shape.rise_time)},
                      {"decay", real(ac.shape.decay)},
                      {"p_birth", real(ac.p_birth)},
                      {"p_death", real(ac.p_death)},
                      {"t_step", real(ac.t_step)},
                      {"log_a_step", real(ac.log_a_step)},
                      {"p_independent_update", real(ac.p_independent_update)},
                      {"initial_muons", muons_json(ac.initial_muons)},
                      {"arrival_only", ac.arrival_only}};
  j["fit"] = {{"iterations", f.iterations},
              {"imh_inner_steps", f.imh_inner_steps},
              {"averaging_window", f.averaging_window},
              {"prune_threshold", f.prune_threshold},
              {"init_pi", real(f.init_pi)},
              {"init_lambda", real(f.init_lambda)},
              {"init_rule", init_rule_name(f.init_rule)},
              {"percentile_for_L", real(f.percentile_for_L)},
              {"threshold_for_L", real(f.threshold_for_L)},
              {"fixed_L", f.fixed_L ? json(*f.fixed_L) : json(nullptr)},
              {"sigma2_floor", real(f.sigma2_floor)},
              {"estimator", estimator_name(f.estimator)}};
  j["montecarlo"] = {{"replicates", c.montecarlo_replicates}, {"reconstruction_draws", c.reconstruction_draws}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Section top(j, "config");
  top.get("seed", c.seed);

  if (const json* s = top.raw("sin_signal")) {
    Section sec(*s, "sin_signal");
    auto& ss = c.sin_signal;
    sec.get("N", ss.N);
    sec.get("omega", ss.omega);
    sec.get("energy", ss.energy);
    sec.get("phase", ss.phase);
    sec.get("snr_db", ss.snr_db);
    sec.finish();
  }
  if (const json* s = top.raw("sin_chain")) {
    Section sec(*s, "sin_chain");
    auto& sc = c.sin_chain;
    sec.get("iterations", sc.iterations);
    sec.get("burn_in", sc.burn_in);
    sec.get("thinning", sc.thinning);
    sec.get("k_max", sc.k_max);
    sec.get("alpha_delta", sc.alpha_delta);
    sec.get("beta_delta", sc.beta_delta);
    sec.get("alpha_Lambda", sc.alpha_Lambda);
    sec.get("beta_Lambda", sc.beta_Lambda);
    sec.get("sample_delta2", sc.sample_delta2);
    sec.get("sample_Lambda", sc.sample_Lambda);
    sec.get("initial_delta2", sc.initial_delta2);
    sec.get("initial_Lambda", sc.initial_Lambda);
    sec.get("initial_omega", sc.initial_omega);
    sec.get("p_birth", sc.p_birth);
    sec.get("p_death", sc.p_death);
    sec.get("rw_step", sc.rw_step);
    sec.get("p_independent_update", sc.p_independent_update);
    sec.finish();
  }
  if (const json* s = top.raw("auger_signal")) {
    Section sec(*s, "auger_signal");
    auto& as = c.auger_signal;
    if (const json* m = sec.raw("muons")) as.muons = muons_from(*m, sec.name("muons"));
    sec.get("bins", as.geometry.N);
    sec.get("t0", as.geometry.t0);
    sec.get("t_delta", as.geometry.t_delta);
    sec.finish();
  }
  if (const json* s = top.raw("auger_chain")) {
    Section sec(*s, "auger_chain");
    auto& ac = c.auger_chain;
    sec.get("iterations", ac.iterations);
    sec.get("burn_in", ac.burn_in);
    sec.get("thinning", ac.thinning);
    sec.get("k_max", ac.k_max);
    sec.get("Lambda_mu", ac.Lambda_mu);
    sec.get("alpha_a", ac.alpha_a);
    sec.get("beta_a", ac.beta_a);
    sec.get("a_max", ac.a_max);
    sec.get("rise_time", ac.shape.rise_time);
    sec.get("decay", ac.shape.decay);
    sec.get("p_birth", ac.p_birth);
    sec.get("p_death", ac.p_death);
    sec.get("t_step", ac.t_step);
    sec.get("log_a_step", ac.log_a_step);
    sec.get("p_independent_update", ac.p_independent_update);
    if (const json* m = sec.raw("initial_muons")) ac.initial_muons = muons_from(*m, sec.name("initial_muons"));
    sec.get("arrival_only", ac.arrival_only);
    sec.finish();
  }
  if (const json* s = top.raw("fit")) {
    Section sec(*s, "fit");
    auto& f = c.fit;
    sec.get("iterations", f.iterations);
    sec.get("imh_inner_steps", f.imh_inner_steps);
    sec.get("averaging_window", f.averaging_window);
    sec.get("prune_threshold", f.prune_threshold);
    sec.get("init_pi", f.init_pi);
    sec.get("init_lambda", f.init_lambda);
    if (const json* r = sec.raw("init_rule")) f.init_rule = init_rule_from(*r);
    sec.get("percentile_for_L", f.percentile_for_L);
    sec.get("threshold_for_L", f.threshold_for_L);
    if (const json* r = sec.raw("fixed_L")) {
      if (r->is_null())
        f.fixed_L.reset();
      else if (r->is_number_integer())
        f.fixed_L = r->get<int>();
      else
        throw DataError("fit.fixed_L: expected an integer or null");
    }
    sec.get("sigma2_floor", f.sigma2_floor);
    if (const json* r = sec.raw("estimator")) f.estimator = estimator_from(*r);
    sec.finish();
  }
  if (const json* s = top.raw("montecarlo")) {
    Section sec(*s, "montecarlo");
    sec.get("replicates", c.montecarlo_replicates);
    sec.get("reconstruction_draws", c.reconstruction_draws);
    sec.finish();
  }
  top.finish();
  return c;
}

std::string canonical_config(const RunConfig& config) {
  // nlohmann::json objects keep keys sorted.
  return to_json(config).dump();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  return in;
}

}  // namespace vapors::io
