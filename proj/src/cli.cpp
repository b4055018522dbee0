#include "gkflab/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include "gkflab/fieldsim.hpp"
#include "gkflab/format.hpp"
#include "gkflab/gkf.hpp"
#include "gkflab/mcharness.hpp"

namespace gkflab {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "space",         "space.kind",         "space.sides",  "space.n",
      "space.radius",  "space.angle",        "space.lambda2", "domain.kind",
      "domain.u",      "domain.a",           "domain.b",     "domain.k",
      "field.ell",     "field.spacing",      "field.k",      "field.statistic",
      "field.mesh_level", "mc.replicates",   "mc.seed",      "mc.workers",
      "mc.z_gate",     "mc.target",          "expect.i",     "gmf.jmax",
      "gmf.force_numeric", "gmf.samples",    "kff.alpha",    "kff.beta",
      "poincare.n",    "tube.rho",           "tube.jmax",    "tube.euclidean",
      "out.format",    "out.path",
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& key, const std::string& raw) {
  std::string text = trim(raw);
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("key '" + key + "': '" + raw + "' is not a number");
  }
  return value;
}

long long to_integer(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("key '" + key + "': '" + raw + "' is not an integer");
  }
  return value;
}

std::uint64_t to_seed(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("key '" + key + "': '" + raw + "' is not a seed (unsigned integer)");
  }
  return value;
}

// flags > file > defaults
class Settings {
 public:
  std::map<std::string, std::string> file;
  std::map<std::string, std::string> flags;

  std::optional<std::string> raw(const std::string& key) const {
    if (auto it = flags.find(key); it != flags.end()) return it->second;
    if (auto it = file.find(key); it != file.end()) return it->second;
    return std::nullopt;
  }
  bool has(const std::string& key) const { return raw(key).has_value(); }

  std::string str(const std::string& key, const std::string& def) const {
    return raw(key).value_or(def);
  }
  double num(const std::string& key, double def) const {
    const auto r = raw(key);
    return r ? to_double(key, *r) : def;
  }
  long long integer(const std::string& key, long long def) const {
    const auto r = raw(key);
    return r ? to_integer(key, *r) : def;
  }
  std::vector<double> nums(const std::string& key, std::vector<double> def) const {
    const auto r = raw(key);
    if (!r) return def;
    std::vector<double> out;
    for (const auto& part : split(*r, ',')) out.push_back(to_double(key, part));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
  }
  std::vector<int> ints(const std::string& key, std::vector<int> def) const {
    const auto r = raw(key);
    if (!r) return def;
    std::vector<int> out;
    for (const auto& part : split(*r, ',')) {
      out.push_back(static_cast<int>(to_integer(key, part)));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
  }
  bool boolean(const std::string& key, bool def) const {
    const auto r = raw(key);
    if (!r) return def;
    const std::string v = trim(*r);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': '" + *r + "' is not a boolean");
  }
  // Master seed: flag or file, then GKFLAB_SEED.
  std::optional<std::uint64_t> seed() const {
    if (auto r = raw("mc.seed")) return to_seed("mc.seed", *r);
    if (const char* env = std::getenv("GKFLAB_SEED"); env && *env) {
      return to_seed("GKFLAB_SEED", env);
    }
    return std::nullopt;
  }
};

SpaceDescriptor space_from_parts(const Settings& s, double scale) {
  const std::string kind = trim(s.str("space.kind", ""));
  std::string text = kind;
  if (kind == "rect" || kind == "rectangle") {
    text = "rect:" + s.str("space.sides", "");
  } else if (kind == "ball") {
    text = "ball:" + s.str("space.n", "2") + "," + s.str("space.radius", "1");
  } else if (kind == "sphere") {
    text = "sphere:" + s.str("space.radius", "1");
  } else if (kind == "cap") {
    text = "cap:" + s.str("space.angle", "");
  }
  return parse_space(text, scale);
}

SpaceDescriptor resolve_space(const Settings& s, const std::string& def) {
  const double scale = s.num("space.lambda2", 1.0);
  if (auto it = s.flags.find("space"); it != s.flags.end()) return parse_space(it->second, scale);
  if (s.file.count("space.kind")) return space_from_parts(s, scale);
  if (auto it = s.file.find("space"); it != s.file.end()) return parse_space(it->second, scale);
  return parse_space(def, scale);
}

DomainDescriptor resolve_domain(const Settings& s, double u, const std::string& def_kind) {
  const std::string spec = trim(s.str("domain.kind", def_kind));
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string params = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const int k = static_cast<int>(s.integer("domain.k", 1));
  DomainDescriptor d;
  if (kind == "halfline") {
    if (k != 1) throw ConfigError("key 'domain.k': a half-line lives in dimension 1");
    d = DomainDescriptor::half_line(params.empty() ? u : to_double("domain.kind", params));
  } else if (kind == "fullspace") {
    d = DomainDescriptor::full_space(k);
  } else if (kind == "ballcomp") {
    d = DomainDescriptor::ball_complement(k, params.empty() ? u : to_double("domain.kind", params));
  } else if (kind == "interval") {
    double a = s.num("domain.a", 0.0), b = s.num("domain.b", 1.0);
    if (!params.empty()) {
      const auto ab = split(params, ',');
      if (ab.size() != 2) throw ConfigError("key 'domain.kind': interval needs a,b");
      a = to_double("domain.kind", ab[0]);
      b = to_double("domain.kind", ab[1]);
    }
    d = DomainDescriptor::interval(a, b);
  } else {
    throw ConfigError("key 'domain.kind': unknown domain '" + spec +
                      "' (halfline, fullspace, ballcomp, interval)");
  }
  try {
    d.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  return d;
}

class Output {
 public:
  Output(const Settings& s, std::ostream& fallback, bool binary = false) {
    if (auto path = s.raw("out.path")) {
      file_.open(*path, binary ? std::ios::binary | std::ios::out : std::ios::out);
      if (!file_) throw ConfigError("key 'out.path': cannot open '" + *path + "'");
      stream_ = &file_;
    } else {
      stream_ = &fallback;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int cmd_expect(const Settings& s, std::ostream& out) {
  const SpaceDescriptor space = resolve_space(s, "rect:10,10");
  const int dim = space.dim();
  const auto orders = s.ints("expect.i", {0});
  const auto us = s.nums("domain.u", {0.0});
  for (int i : orders) {
    if (i < 0 || i > dim) {
      throw ConfigError("key 'expect.i': order " + std::to_string(i) + " outside 0.." +
                        std::to_string(dim));
    }
  }
  Output sink(s, out);
  auto& os = sink.stream();
  os << "u,i,predicted";
  for (int j = 0; j <= dim; ++j) os << ",term_" << j;
  os << '\n';
  for (double u : us) {
    const DomainDescriptor d = resolve_domain(s, u, "halfline");
    for (int i : orders) {
      const GkfPrediction p = expected_lk(i, space, d);
      os << format_fixed(u) << ',' << i << ',' << format_fixed(p.value);
      for (int j = 0; j <= dim; ++j) {
        os << ',';
        if (j < static_cast<int>(p.terms.size())) os << format_fixed(p.terms[j]);
      }
      os << '\n';
    }
  }
  return 0;
}

int cmd_gmf(const Settings& s, std::ostream& out) {
  const double u = s.nums("domain.u", {0.0}).front();
  const DomainDescriptor d = resolve_domain(s, u, "halfline");
  const int j_max = static_cast<int>(s.integer("gmf.jmax", 2));
  if (j_max < 0) throw ConfigError("key 'gmf.jmax': must be >= 0");
  const bool numeric = s.boolean("gmf.force_numeric", false) || !has_closed_form(d);
  Output sink(s, out);
  auto& os = sink.stream();
  if (!numeric) {
    const GmfVector g = gmf_closed_form(d, j_max);
    os << "j,M_j\n";
    for (int j = 0; j <= j_max; ++j) os << j << ',' << format_fixed(g.values[j]) << '\n';
    return 0;
  }
  GmfNumericSettings settings;
  settings.samples = s.integer("gmf.samples", settings.samples);
  settings.seed = s.seed().value_or(1);
  settings.workers = static_cast<int>(s.integer("mc.workers", 0));
  const GmfVector g = gmf_numeric(d, j_max, settings);
  os << "j,M_j,stderr\n";
  for (int j = 0; j <= j_max; ++j) {
    os << j << ',' << format_fixed(g.values[j]) << ',' << format_fixed((*g.errors)[j]) << '\n';
  }
  return 0;
}

int cmd_simulate(const Settings& s, std::ostream& out) {
  const SpaceDescriptor space = resolve_space(s, "rect:10,10");
  const auto* rect = std::get_if<Rectangle>(&space.kind);
  if (!rect) throw ConfigError("key 'space': field dumps cover rectangles only");
  const auto seed = s.seed();
  if (!seed) throw ConfigError("key 'mc.seed': simulate needs --seed (or GKFLAB_SEED)");
  const double spacing = s.num("field.spacing", 0.2);
  const double ell = s.num("field.ell", 1.0);
  const int k = static_cast<int>(s.integer("field.k", 1));
  const std::string format = s.str("out.format", "text");
  if (format != "text" && format != "binary") {
    throw ConfigError("key 'out.format': simulate writes text or binary");
  }
  if (!(spacing > 0.0)) throw ConfigError("key 'field.spacing': must be > 0");
  GridSpec grid;
  grid.spacing = spacing;
  for (double side : rect->sides) {
    const double cells = std::round(side / spacing);
    if (cells < 2 || std::abs(cells * spacing - side) > 1e-9 * side) {
      throw ConfigError("key 'field.spacing': side " + format_fixed(side) +
                        " is not a whole number (>= 2) of spacings");
    }
    grid.dims.push_back(static_cast<int>(cells));
  }
  const FieldSample field = simulate_field(grid, ell, k, *seed);
  const bool binary = format == "binary";
  Output sink(s, out, binary);
  write_field_dump(sink.stream(), field, binary ? DumpFormat::Binary : DumpFormat::Text);
  return 0;
}

int cmd_validate(const std::string& name, const Settings& s, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.kind = experiment_kind_from_string(name);
  cfg.seed = s.seed().value_or(1);
  cfg.workers = static_cast<int>(s.integer("mc.workers", 0));
  cfg.z_gate = s.num("mc.z_gate", cfg.kind == ExperimentKind::Sup ? 4.0 : 3.0);
  cfg.mesh_level = static_cast<int>(s.integer("field.mesh_level", 5));
  constexpr double deg = std::numbers::pi / 180.0;
  long long reps = 2000;
  switch (cfg.kind) {
    case ExperimentKind::Ec:
    case ExperimentKind::Volume:
    case ExperimentKind::Sup: {
      cfg.space = resolve_space(s, "rect:10,10");
      cfg.ell = s.num("field.ell", 1.0);
      cfg.spacing = s.num("field.spacing", 0.2);
      const std::string stat = s.str("field.statistic", "gaussian");
      if (stat == "gaussian") {
        cfg.statistic = Statistic::Gaussian;
      } else if (stat == "chisquare") {
        cfg.statistic = Statistic::ChiSquare;
      } else {
        throw ConfigError("key 'field.statistic': gaussian or chisquare");
      }
      cfg.k = static_cast<int>(s.integer("field.k", stat == "chisquare" ? 2 : 1));
      if (cfg.kind == ExperimentKind::Ec) cfg.thresholds = s.nums("domain.u", {1.0, 2.0, 2.5});
      if (cfg.kind == ExperimentKind::Volume) {
        cfg.thresholds = s.nums("domain.u", {-1.0, 0.0, 1.0, 2.0});
      }
      if (cfg.kind == ExperimentKind::Sup) {
        reps = 20000;
        if (s.has("domain.u") && !s.has("mc.target")) {
          cfg.thresholds = s.nums("domain.u", {});
        } else {
          cfg.sup_target = s.num("mc.target", 0.05);
        }
      }
      break;
    }
    case ExperimentKind::Kff:
      reps = 50000;
      cfg.alpha = s.num("kff.alpha", 30.0) * deg;
      cfg.beta = s.num("kff.beta", 30.0) * deg;
      break;
    case ExperimentKind::Poincare:
      reps = 5000;
      cfg.n_list = s.ints("poincare.n", {10, 100, 1000});
      cfg.k = static_cast<int>(s.integer("field.k", 1));
      break;
    case ExperimentKind::Tube:
      reps = 1'000'000;
      cfg.euclidean_tube = s.boolean("tube.euclidean", false);
      cfg.j_max = static_cast<int>(s.integer("tube.jmax", 3));
      if (cfg.euclidean_tube) {
        cfg.space = resolve_space(s, "rect:3,4");
        cfg.rho_list = s.nums("tube.rho", {0.0, 0.5});
      } else {
        cfg.domain = resolve_domain(s, s.nums("domain.u", {1.0}).front(), "halfline");
        cfg.rho_list = s.nums("tube.rho", {0.0, 0.05, 0.1});
      }
      break;
  }
  const long long requested = s.integer("mc.replicates", reps);
  if (requested < 2) throw ConfigError("key 'mc.replicates': replicates must be >= 2");
  if (requested > std::numeric_limits<int>::max()) {
    throw ConfigError("key 'mc.replicates': too large");
  }
  cfg.replicates = static_cast<int>(requested);

  const ExperimentReport report = run_experiment(cfg);
  const std::string format = s.str("out.format", "csv");
  if (format != "csv" && format != "json") {
    throw ConfigError("key 'out.format': validate writes csv or json");
  }
  if (auto path = s.raw("out.path")) {
    std::ofstream js(*path + ".json"), csv(*path + ".csv");
    if (!js || !csv) throw ConfigError("key 'out.path': cannot write '" + *path + ".*'");
    js << to_json(report).dump(2) << '\n';
    csv << to_csv(report);
  }
  if (format == "json") {
    out << to_json(report).dump(2) << '\n';
  } else {
    out << to_csv(report);
  }
  out << report.verdict() << '\n';
  return report.passed ? 0 : 1;
}

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
  bool is_switch = false;
};

class FlagTable {
 public:
  void add(CLI::App* app, const FlagSpec& spec) {
    auto& slot = values_.emplace_back();
    CLI::Option* opt = spec.is_switch ? app->add_flag(spec.flag, spec.help)
                                      : app->add_option(spec.flag, slot, spec.help);
    regs_.push_back({opt, spec.key, spec.is_switch, &slot});
  }
  void add_all(CLI::App* app, std::initializer_list<FlagSpec> specs) {
    for (const auto& spec : specs) add(app, spec);
  }
  // Flags given on the command line, as config keys.
  void collect(std::map<std::string, std::string>& into) const {
    for (const auto& r : regs_) {
      if (r.option->count() == 0) continue;
      into[r.key] = r.is_switch ? "true" : *r.slot;
    }
  }

 private:
  struct Reg {
    CLI::Option* option;
    std::string key;
    bool is_switch;
    std::string* slot;
  };
  std::deque<std::string> values_;
  std::vector<Reg> regs_;
};

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string where = "config line " + std::to_string(number) + ": ";
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!known_keys().count(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "key '" + key + "' has no value");
    if (!out.emplace(key, value).second) {
      throw ConfigError(where + "key '" + key + "' given twice");
    }
  }
  return out;
}

SpaceDescriptor parse_space(const std::string& raw, double metric_scale) {
  const std::string text = trim(raw);
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string params = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::vector<double> v;
  if (!params.empty()) {
    for (const auto& p : split(params, ',')) v.push_back(to_double("space", p));
  }
  SpaceDescriptor space;
  space.metric_scale = metric_scale;
  if (kind == "point") {
    space.kind = Rectangle{};
  } else if (kind == "rect" || kind == "rectangle") {
    if (v.empty()) throw ConfigError("key 'space': rect needs side lengths, e.g. rect:10,10");
    space.kind = Rectangle{v};
  } else if (kind == "ball") {
    if (v.size() != 2 || v[0] != std::floor(v[0])) {
      throw ConfigError("key 'space': ball needs n,R, e.g. ball:3,1");
    }
    space.kind = Ball{static_cast<int>(v[0]), v[1]};
  } else if (kind == "sphere") {
    if (v.size() > 1) throw ConfigError("key 'space': sphere takes one radius");
    space.kind = Sphere2{v.empty() ? 1.0 : v[0]};
  } else if (kind == "cap") {
    if (v.size() != 1) throw ConfigError("key 'space': cap needs an angle in degrees");
    space.kind = Cap{v[0] * std::numbers::pi / 180.0};
  } else {
    throw ConfigError("key 'space': unknown space '" + text +
                      "' (rect:a,b  point  ball:n,R  sphere:R  cap:deg)");
  }
  try {
    space.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("key 'space': ") + e.what());
  }
  return space;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Expected curvatures of Gaussian excursion sets, and Monte Carlo checks of them"};
  app.name("gkflab");
  app.require_subcommand(1);

  std::string config_path;
  FlagTable table;
  const FlagSpec common[] = {
      {"--out", "out.path", "write output here instead of stdout"},
      {"--format", "out.format", "text|binary (simulate), csv|json (validate)"},
      {"--seed", "mc.seed", "master seed (fallback: GKFLAB_SEED)"},
      {"--workers", "mc.workers", "worker threads, 0 = all cores"},
  };
  auto with_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value file");
    for (const auto& spec : common) table.add(sub, spec);
  };

  CLI::App* expect = app.add_subcommand("expect", "closed-form expected curvatures");
  with_common(expect);
  table.add_all(expect, {{"--space", "space", "rect:a,b | point | ball:n,R | sphere:R | cap:deg"},
                         {"--lambda2", "space.lambda2", "induced metric scale"},
                         {"--domain", "domain.kind", "halfline | fullspace | ballcomp | interval"},
                         {"--u", "domain.u", "threshold(s), comma separated"},
                         {"--a", "domain.a", "interval lower end"},
                         {"--b", "domain.b", "interval upper end"},
                         {"--k", "domain.k", "dimension of the domain's space"},
                         {"--i", "expect.i", "curvature order(s), comma separated"}});

  CLI::App* gmf = app.add_subcommand("gmf", "Gaussian Minkowski functionals of a domain");
  with_common(gmf);
  table.add_all(gmf, {{"--domain", "domain.kind", "halfline | fullspace | ballcomp | interval"},
                      {"--u", "domain.u", "threshold or radius"},
                      {"--a", "domain.a", "interval lower end"},
                      {"--b", "domain.b", "interval upper end"},
                      {"--k", "domain.k", "dimension"},
                      {"--jmax", "gmf.jmax", "highest order"},
                      {"--samples", "gmf.samples", "Monte Carlo draws for the numeric path"},
                      {"--force-numeric", "gmf.force_numeric", "fit the tube measure", true}});

  CLI::App* simulate = app.add_subcommand("simulate", "dump one Gaussian field realization");
  with_common(simulate);
  table.add_all(simulate, {{"--space", "space", "rect:a,b or point"},
                           {"--spacing", "field.spacing", "grid spacing"},
                           {"--ell", "field.ell", "covariance length scale"},
                           {"--k", "field.k", "number of components"}});

  std::string experiment;
  CLI::App* validate = app.add_subcommand("validate", "Monte Carlo check of a prediction");
  validate->add_option("experiment", experiment, "ec | volume | sup | kff | poincare | tube")
      ->required()
      ->check(CLI::IsMember({"ec", "volume", "sup", "kff", "poincare", "tube"}));
  with_common(validate);
  table.add_all(validate,
                {{"--space", "space", "rect:a,b | point | sphere:1 | ball:n,R"},
                 {"--statistic", "field.statistic", "gaussian | chisquare"},
                 {"--k", "field.k", "field components"},
                 {"--u", "domain.u", "threshold(s), comma separated"},
                 {"--ell", "field.ell", "covariance length scale"},
                 {"--spacing", "field.spacing", "grid spacing (at most ell/5)"},
                 {"--mesh-level", "field.mesh_level", "icosphere subdivision level"},
                 {"--replicates", "mc.replicates", "Monte Carlo replicates (samples for tube)"},
                 {"--z-gate", "mc.z_gate", "pass bound on |z|"},
                 {"--target", "mc.target", "sup: tune u so the heuristic predicts this tail"},
                 {"--alpha", "kff.alpha", "first cap radius, degrees"},
                 {"--beta", "kff.beta", "second cap radius, degrees"},
                 {"--n", "poincare.n", "ambient dimensions, comma separated"},
                 {"--domain", "domain.kind", "tube: halfline | ballcomp | interval"},
                 {"--a", "domain.a", "interval lower end"},
                 {"--b", "domain.b", "interval upper end"},
                 {"--rho", "tube.rho", "tube radii, comma separated"},
                 {"--jmax", "tube.jmax", "tube series order"},
                 {"--euclidean", "tube.euclidean", "Euclidean tube of --space", true}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    Settings settings;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("cannot read config file '" + config_path + "'");
      try {
        settings.file = parse_config(is);
      } catch (const ConfigError& e) {
        throw ConfigError(config_path + ": " + e.what());
      }
    }
    table.collect(settings.flags);
    if (*expect) return cmd_expect(settings, out);
    if (*gmf) return cmd_gmf(settings, out);
    if (*simulate) return cmd_simulate(settings, out);
    if (*validate) return cmd_validate(experiment, settings, out);
  } catch (const std::exception& e) {
    err << "gkflab: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace gkflab
