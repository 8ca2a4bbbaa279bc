#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "manifest.hpp"
#include "reshare/analysis.hpp"
#include "reshare/error.hpp"
#include "reshare/ingest.hpp"
#include "reshare/io.hpp"
#include "reshare/network.hpp"
#include "reshare/reconstruct.hpp"
#include "reshare/simd/kernels.hpp"
#include "reshare/synth.hpp"

namespace reshare::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string followers;
  std::string trees;
  std::string out_dir;
  std::uint64_t seed = 1;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<double> gamma{0.25, 0.5, 0.75};
  std::vector<double> alpha{1.1, 2.0, 3.0};
  double delta_min = 1.0;
  std::uint32_t realizations = 100;
  bool realizations_set = false;
  std::vector<std::string> methods;
  std::vector<double> top_k{0.01, 0.05, 0.10};
  std::size_t bins = 500;
  std::size_t bootstraps = 1000;
  bool exclude_zero_strength = false;
  std::string isa;
  bool quiet = false;
  SynthConfig synth;
  std::string follower_law = "lognormal";
  std::string model = "pdi";
};

// --- config file -----------------------------------------------------------

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "': not a number: " + v);
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto u = std::stoull(v, &used);
      if (used == v.size()) return u;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "': not a non-negative integer: " + v);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("config key '" + key + "': not a boolean: " + v);
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

void apply_config_key(RunConfig& c, std::string key, const std::string& v) {
  std::replace(key.begin(), key.end(), '_', '-');
  auto& s = c.synth;
  if (key == "input") c.input = v;
  else if (key == "followers") c.followers = v;
  else if (key == "trees") c.trees = v;
  else if (key == "out-dir") c.out_dir = v;
  else if (key == "seed") c.seed = to_uint(key, v);
  else if (key == "workers") c.workers = static_cast<unsigned>(to_uint(key, v));
  else if (key == "gamma") c.gamma = to_doubles(key, v);
  else if (key == "alpha") c.alpha = to_doubles(key, v);
  else if (key == "delta-min") c.delta_min = to_double(key, v);
  else if (key == "realizations") {
    c.realizations = static_cast<std::uint32_t>(to_uint(key, v));
    c.realizations_set = true;
  } else if (key == "method") c.methods = split_list(v);
  else if (key == "top-k") c.top_k = to_doubles(key, v);
  else if (key == "bins") c.bins = to_uint(key, v);
  else if (key == "bootstraps") c.bootstraps = to_uint(key, v);
  else if (key == "exclude-zero-strength") c.exclude_zero_strength = to_bool(key, v);
  else if (key == "isa") c.isa = v;
  else if (key == "n-cascades") s.n_cascades = to_uint(key, v);
  else if (key == "n-users") s.n_users = to_uint(key, v);
  else if (key == "size-exponent") s.size_exponent = to_double(key, v);
  else if (key == "min-size") s.min_size = to_uint(key, v);
  else if (key == "max-size") s.max_size = to_uint(key, v);
  else if (key == "follower-law") c.follower_law = v;
  else if (key == "follower-mu") s.follower_mu = to_double(key, v);
  else if (key == "follower-sigma") s.follower_sigma = to_double(key, v);
  else if (key == "follower-exponent") s.follower_exponent = to_double(key, v);
  else if (key == "follower-xmin") s.follower_xmin = to_double(key, v);
  else if (key == "gap-exponent") s.gap_exponent = to_double(key, v);
  else if (key == "gap-min") s.gap_min = to_double(key, v);
  else if (key == "model") c.model = v;
  else if (key == "follow-probability") s.follow_probability = to_double(key, v);
  else if (key == "root-by-followers") s.root_by_followers = to_bool(key, v);
  else throw UsageError("unknown config key: " + key);
}

void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

// --- validation ------------------------------------------------------------

double canonical(double x) { return std::stod(format_real(x)); }

std::vector<double> canonical_set(std::vector<double> v) {
  for (double& x : v) x = canonical(x);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& raw : names)
    for (const auto& name : split_list(raw)) {
      const auto m = parse_method(name);
      if (!m) throw UsageError("unknown method: " + name + " (expected naive, tid or pdi)");
      if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    }
  std::sort(out.begin(), out.end());
  return out;
}

bool has(const std::vector<Method>& ms, Method m) {
  return std::find(ms.begin(), ms.end(), m) != ms.end();
}

std::vector<Setting> pdi_grid(const RunConfig& c) {
  std::vector<Setting> out;
  for (double g : c.gamma)
    for (double a : c.alpha) {
      Setting s{Method::Pdi, PdiParams{g, a, c.delta_min}};
      try {
        s.params.validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      out.push_back(s);
    }
  return out;
}

std::vector<Setting> settings_for(const RunConfig& c, const std::vector<Method>& methods) {
  std::vector<Setting> out;
  if (has(methods, Method::Naive)) out.push_back(Setting{Method::Naive, {}});
  if (has(methods, Method::Tid)) out.push_back(Setting{Method::Tid, {}});
  if (has(methods, Method::Pdi))
    for (const auto& s : pdi_grid(c)) out.push_back(s);
  return out;
}

void finalize(RunConfig& c, std::ostream& err) {
  c.gamma = canonical_set(c.gamma);
  c.alpha = canonical_set(c.alpha);
  c.delta_min = canonical(c.delta_min);
  c.top_k = canonical_set(c.top_k);
  if (c.workers == 0) throw UsageError("--workers must be at least 1");
  if (c.realizations == 0) throw UsageError("--realizations must be at least 1");
  for (double k : c.top_k)
    if (!(k > 0.0 && k <= 1.0)) throw UsageError("--top-k values must lie in (0, 1]");
  if (c.bins == 0) throw UsageError("--bins must be at least 1");
  if (!c.isa.empty()) {
    const auto isa = simd::parse_isa(c.isa);
    if (!isa) throw UsageError("unknown --isa: " + c.isa);
    bool ok = false;
    for (const auto* t : simd::available_kernels()) ok = ok || t->isa == *isa;
    if (!ok) throw UsageError("ISA not available on this machine: " + c.isa);
    simd::force_isa(*isa);
  }
  (void)err;
}

// --- shared helpers ----------------------------------------------------------

void require(const std::string& value, const char* flag, const std::string& why) {
  if (value.empty()) throw UsageError(std::string("missing ") + flag + ": " + why);
}

std::string out_path(const RunConfig& c, const char* name) {
  return (fs::path(c.out_dir) / name).string();
}

void prepare_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + c.out_dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

json doubles_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(json_real(x));
  return a;
}

json strings_json(const std::vector<std::string>& v) {
  json a = json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

json config_json(const RunConfig& c, const std::vector<Method>& methods) {
  json j;
  j["command"] = c.command;
  if (!c.input.empty()) j["input"] = c.input;
  if (!c.followers.empty()) j["followers"] = c.followers;
  if (!c.trees.empty()) j["trees"] = c.trees;
  j["seed"] = c.seed;
  if (c.command == "synth") {
    const auto& s = c.synth;
    j["n_cascades"] = s.n_cascades;
    j["n_users"] = s.n_users;
    j["size_exponent"] = json_real(s.size_exponent);
    j["min_size"] = s.min_size;
    j["max_size"] = s.max_size;
    j["follower_law"] = c.follower_law;
    j["follower_mu"] = json_real(s.follower_mu);
    j["follower_sigma"] = json_real(s.follower_sigma);
    j["follower_exponent"] = json_real(s.follower_exponent);
    j["follower_xmin"] = json_real(s.follower_xmin);
    j["gap_exponent"] = json_real(s.gap_exponent);
    j["gap_min"] = json_real(s.gap_min);
    j["model"] = c.model;
    j["gamma"] = json_real(s.generative.gamma);
    j["alpha"] = json_real(s.generative.alpha);
    j["delta_min"] = json_real(s.generative.delta_min);
    j["follow_probability"] = json_real(s.follow_probability);
    j["root_by_followers"] = s.root_by_followers;
    return j;
  }
  json m = json::array();
  for (Method x : methods) m.push_back(std::string(to_string(x)));
  j["methods"] = m;
  j["gamma"] = doubles_json(c.gamma);
  j["alpha"] = doubles_json(c.alpha);
  j["delta_min"] = json_real(c.delta_min);
  j["realizations"] = c.realizations;
  if (c.command == "influence") {
    j["top_k"] = doubles_json(c.top_k);
    j["exclude_zero_strength"] = c.exclude_zero_strength;
  }
  if (c.command == "structure") {
    j["bins"] = c.bins;
    j["bootstraps"] = c.bootstraps;
  }
  return j;
}

void write_manifest(const RunConfig& c, const std::vector<Method>& methods,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = {{"name", "reshare"}, {"version", kToolVersion}};
  m["config"] = config_json(c, methods);
  m["seed"] = c.seed;
  m["isa"] = std::string(to_string(simd::active().isa));
  json inputs = json::array();
  auto add_input = [&](const char* role, const std::string& path) {
    if (!path.empty()) inputs.push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
  };
  add_input("input", c.input);
  add_input("followers", c.followers);
  add_input("trees", c.trees);
  m["inputs"] = inputs;
  m["outputs"] = strings_json(outputs);
  write_json_file(out_path(c, "manifest.json"), m);
}

struct Inputs {
  CascadeParseResult cascades;
  ProfileMap profiles;
  std::optional<FollowerParseResult> followers;
};

Inputs load_inputs(const RunConfig& c, bool need_followers, std::ostream& err) {
  Inputs in;
  in.cascades = parse_cascades_file(c.input);
  if (!c.quiet && !in.cascades.rejections.empty()) {
    std::map<std::string_view, std::size_t> by_reason;
    for (const auto& r : in.cascades.rejections) ++by_reason[to_string(r.reason)];
    err << "reshare: rejected " << in.cascades.rejections.size() << " of "
        << in.cascades.records << " records (";
    bool first = true;
    for (const auto& [reason, n] : by_reason) {
      err << (first ? "" : ", ") << reason << ' ' << n;
      first = false;
    }
    err << ")\n";
  }
  in.profiles = compute_user_profiles(in.cascades.cascades);
  if (need_followers || !c.followers.empty()) {
    in.followers = parse_follower_edges_file(c.followers);
    if (!c.quiet && !in.followers->rejections.empty())
      err << "reshare: skipped " << in.followers->rejections.size()
          << " malformed follower rows\n";
  }
  return in;
}

class Progress {
 public:
  Progress(std::ostream& err, bool quiet, std::size_t total, const char* what)
      : err_(err), quiet_(quiet), total_(total), what_(what) {}
  void tick() {
    ++done_;
    if (quiet_ || total_ < 20) return;
    const std::size_t step = std::max<std::size_t>(1, total_ / 10);
    if (done_ % step == 0 || done_ == total_)
      err_ << "reshare: " << what_ << ' ' << done_ << '/' << total_ << '\n';
  }

 private:
  std::ostream& err_;
  bool quiet_;
  std::size_t total_;
  std::size_t done_ = 0;
  const char* what_;
};

/// Runs batch reconstruction and forwards each record. Progress counts
/// cascades.
void reconstruct_stream(const RunConfig& c, const Inputs& in, std::span<const Setting> settings,
                        std::ostream& err, const std::function<void(const TreeRecord&)>& fn) {
  BatchOptions opts;
  opts.realizations = c.realizations;
  opts.master_seed = c.seed;
  opts.workers = c.workers;
  Progress progress(err, c.quiet, in.cascades.cascades.size(), "reconstructed cascades");
  std::size_t units = 0;
  batch_reconstruct(in.cascades.cascades, in.profiles,
                    in.followers ? &in.followers->graph : nullptr, settings, opts,
                    [&](std::span<const TreeRecord> records) {
                      for (const auto& r : records) fn(r);
                      if (++units % settings.size() == 0) progress.tick();
                    });
  if (!c.quiet && opts.tid_fallback_edges > 0)
    err << "reshare: tid used the follower-count fallback for " << opts.tid_fallback_edges
        << " edges\n";
}

void warn_deterministic(const RunConfig& c, const std::vector<Method>& methods,
                        std::ostream& err) {
  if (c.realizations_set && c.realizations > 1 && !has(methods, Method::Pdi))
    err << "reshare: warning: naive and tid are deterministic; writing one realization "
           "instead of "
        << c.realizations << '\n';
}

std::string setting_field(const Setting& s, bool gamma) {
  if (s.method == Method::Tid) return "TID";
  if (s.method == Method::Naive) return "naive";
  return format_real(gamma ? s.params.gamma : s.params.alpha);
}

std::string pdi_field(const Setting& s, bool gamma) {
  if (s.method != Method::Pdi) return "";
  return format_real(gamma ? s.params.gamma : s.params.alpha);
}

// --- commands --------------------------------------------------------------

int cmd_reconstruct(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto methods = parse_methods(c.methods.empty() ? std::vector<std::string>{"pdi"} : c.methods);
  require(c.input, "--input", "reconstruct needs a cascades file");
  require(c.out_dir, "--out-dir", "reconstruct writes trees.jsonl there");
  if (has(methods, Method::Tid))
    require(c.followers, "--followers", "method tid needs the follower edge list");
  const auto settings = settings_for(c, methods);
  warn_deterministic(c, methods, err);

  const Inputs in = load_inputs(c, has(methods, Method::Tid), err);
  prepare_out_dir(c);
  {
    const auto path = out_path(c, "rejections.jsonl");
    auto f = open_out(path);
    write_rejections(f, in.cascades.rejections);
    close_out(f, path);
  }
  const auto path = out_path(c, "trees.jsonl");
  auto f = open_out(path);
  std::size_t n = 0;
  reconstruct_stream(c, in, settings, err, [&](const TreeRecord& r) {
    f << tree_record_json(r) << '\n';
    ++n;
  });
  close_out(f, path);
  write_manifest(c, methods, {"trees.jsonl", "rejections.jsonl"});
  out << "cascades " << in.cascades.cascades.size() << "\nrejected "
      << in.cascades.rejections.size() << "\ntrees " << n << '\n';
  return kOk;
}

/// Feeds either a trees file or an in-memory reconstruction to `fn`.
void tree_source(const RunConfig& c, const Inputs& in, std::span<const Setting> settings,
                 std::ostream& err, const std::function<void(TreeRecord&&)>& fn) {
  if (!c.trees.empty()) {
    read_tree_records_file(c.trees, fn);
    return;
  }
  reconstruct_stream(c, in, settings, err, [&](const TreeRecord& r) { fn(TreeRecord(r)); });
}

int cmd_influence(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto methods =
      parse_methods(c.methods.empty() ? std::vector<std::string>{"naive", "pdi"} : c.methods);
  require(c.input, "--input", "influence needs the cascades file");
  require(c.out_dir, "--out-dir", "influence writes its tables there");
  if (c.trees.empty()) {
    if (!has(methods, Method::Naive)) methods.insert(methods.begin(), Method::Naive);
    if (has(methods, Method::Tid))
      require(c.followers, "--followers", "method tid needs the follower edge list");
    warn_deterministic(c, methods, err);
  }
  const auto settings = settings_for(c, methods);
  const Inputs in = load_inputs(c, c.trees.empty() && has(methods, Method::Tid), err);
  const auto& corpus = in.cascades.cascades;

  InfluenceOptions opts;
  opts.top_k = c.top_k;
  opts.exclude_zero_strength = c.exclude_zero_strength;
  InfluenceAnalysis analysis(corpus, opts);
  std::vector<CascadeTree> naive_trees;
  tree_source(c, in, settings, err, [&](TreeRecord&& r) {
    analysis.add(r);
    if (r.setting.method == Method::Naive) naive_trees.push_back(std::move(r.tree));
  });
  const InfluenceReport report = analysis.finish();
  prepare_out_dir(c);

  json stats;
  stats["users"] = report.users.size();
  stats["exclude_zero_strength"] = c.exclude_zero_strength;
  stats["top_k"] = doubles_json(c.top_k);
  json settings_json = json::array();
  for (const auto& s : report.settings) {
    json js;
    js["method"] = std::string(to_string(s.setting.method));
    js["gamma"] = s.setting.method == Method::Pdi ? json_real(s.setting.params.gamma) : json();
    js["alpha"] = s.setting.method == Method::Pdi ? json_real(s.setting.params.alpha) : json();
    js["rho_mean"] = json_real(s.rho_mean);
    js["rho_sd"] = json_real(s.rho_sd);
    json reals = json::array();
    for (std::size_t r = 0; r < s.rho.size(); ++r) {
      json jr;
      jr["realization"] = r;
      jr["rho"] = json_real(s.rho[r]);
      json tk = json::array();
      for (const auto& t : s.top_k) tk.push_back({{"k", json_real(t.k)}, {"jaccard", json_real(t.jaccard[r])}});
      jr["top_k"] = tk;
      reals.push_back(jr);
    }
    js["realizations"] = reals;
    settings_json.push_back(js);
  }
  stats["settings"] = settings_json;
  write_json_file(out_path(c, "stats.json"), stats);

  {
    const auto path = out_path(c, "strengths.csv");
    auto f = open_out(path);
    f << "user_id,strength\n";
    for (std::size_t u = 0; u < report.users.size(); ++u)
      f << report.users[u] << ',' << report.naive_strength[u] << '\n';
    close_out(f, path);
  }
  {
    const auto path = out_path(c, "strength_change.csv");
    auto f = open_out(path);
    f << "method,gamma,alpha,user_id,naive_strength,mean_change\n";
    for (const auto& s : report.settings)
      for (std::size_t u = 0; u < report.users.size(); ++u)
        f << to_string(s.setting.method) << ',' << pdi_field(s.setting, true) << ','
          << pdi_field(s.setting, false) << ',' << report.users[u] << ','
          << report.naive_strength[u] << ',' << format_real(s.mean_strength_change[u]) << '\n';
    close_out(f, path);
  }
  {
    const auto net = build_network(naive_trees, corpus);
    const auto path = out_path(c, "network.csv");
    auto f = open_out(path);
    f << "src,dst,weight\n";
    for (const auto& [edge, w] : net.edges) f << edge.first << ',' << edge.second << ',' << w << '\n';
    close_out(f, path);
  }
  write_manifest(c, methods,
                 {"stats.json", "strengths.csv", "strength_change.csv", "network.csv"});
  for (const auto& s : report.settings)
    out << to_string(s.setting.method) << ' ' << pdi_field(s.setting, true) << ' '
        << pdi_field(s.setting, false) << " rho_mean " << format_real(s.rho_mean) << " rho_sd "
        << format_real(s.rho_sd) << '\n';
  return kOk;
}

int cmd_structure(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto methods =
      parse_methods(c.methods.empty() ? std::vector<std::string>{"tid", "pdi"} : c.methods);
  require(c.input, "--input", "structure needs the cascades file");
  require(c.out_dir, "--out-dir", "structure writes its tables there");
  if (c.trees.empty() && has(methods, Method::Tid))
    require(c.followers, "--followers", "method tid needs the follower edge list");
  if (c.trees.empty()) warn_deterministic(c, methods, err);
  const auto settings = settings_for(c, methods);
  const Inputs in = load_inputs(c, c.trees.empty() && has(methods, Method::Tid), err);

  StructureOptions opts;
  for (const auto& s : settings)
    if (s.method != Method::Naive) opts.required.push_back(s);
  std::sort(opts.required.begin(), opts.required.end(), setting_less);
  opts.bins = c.bins;
  opts.bootstraps = c.bootstraps;
  opts.seed = c.seed;

  prepare_out_dir(c);
  const auto metrics_path = out_path(c, "metrics.csv");
  const auto similarity_path = out_path(c, "similarity.csv");
  auto metrics = open_out(metrics_path);
  auto similarity = open_out(similarity_path);
  StructureAnalysis::write_metrics_header(metrics);
  StructureAnalysis::write_similarity_header(similarity);
  StructureAnalysis analysis(in.cascades.cascades, opts, &metrics, &similarity);
  tree_source(c, in, settings, err, [&](TreeRecord&& r) { analysis.add(std::move(r)); });
  const StructureReport report = analysis.finish();
  close_out(metrics, metrics_path);
  close_out(similarity, similarity_path);

  {
    const auto path = out_path(c, "ccdf.csv");
    auto f = open_out(path);
    f << "metric,method,gamma,alpha,x,survival\n";
    for (const auto& row : report.ccdf)
      for (const auto& p : row.curve)
        f << to_string(row.metric) << ',' << to_string(row.setting.method) << ','
          << pdi_field(row.setting, true) << ',' << pdi_field(row.setting, false) << ','
          << format_real(p.x) << ',' << format_real(p.survival) << '\n';
    close_out(f, path);
  }
  {
    const auto path = out_path(c, "ks_table.csv");
    auto f = open_out(path);
    f << "metric,gamma1,alpha1,gamma2,alpha2,statistic,p,p_adj,sig\n";
    for (const auto& row : report.ks)
      f << to_string(row.metric) << ',' << setting_field(row.first, true) << ','
        << setting_field(row.first, false) << ',' << setting_field(row.second, true) << ','
        << setting_field(row.second, false) << ',' << format_real(row.result.statistic) << ','
        << format_real(row.result.p_value) << ',' << format_real(row.result.p_adjusted) << ','
        << significance_stars(row.result.p_adjusted) << '\n';
    close_out(f, path);
  }
  {
    const auto path = out_path(c, "trend.csv");
    auto f = open_out(path);
    f << "x_center,mean,ci_low,ci_high,count,gamma,alpha,comparison\n";
    for (const auto& row : report.trend) {
      if (row.trend.bins_reduced && !c.quiet)
        err << "reshare: warning: " << row.comparison << " trend for gamma "
            << pdi_field(row.setting, true) << " alpha " << pdi_field(row.setting, false)
            << " has fewer points than bins; using " << row.trend.bins.size() << " bins\n";
      for (const auto& b : row.trend.bins)
        f << format_real(b.x_center) << ',' << format_real(b.mean) << ','
          << format_real(b.ci_low) << ',' << format_real(b.ci_high) << ',' << b.count << ','
          << pdi_field(row.setting, true) << ',' << pdi_field(row.setting, false) << ','
          << row.comparison << '\n';
    }
    close_out(f, path);
  }
  {
    json summary = json::array();
    for (const auto& s : report.samples) {
      json js;
      js["method"] = std::string(to_string(s.setting.method));
      js["gamma"] = s.setting.method == Method::Pdi ? json_real(s.setting.params.gamma) : json();
      js["alpha"] = s.setting.method == Method::Pdi ? json_real(s.setting.params.alpha) : json();
      js["cascades"] = s.values[0].size();
      for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
        double sum = 0.0;
        for (double v : s.values[m]) sum += v;
        js[std::string("mean_") + std::string(to_string(kAllMetrics[m]))] =
            json_real(s.values[m].empty() ? 0.0 : sum / static_cast<double>(s.values[m].size()));
      }
      summary.push_back(js);
    }
    json doc;
    doc["settings"] = summary;
    doc["ks_p_value"] = "asymptotic two-sample Kolmogorov distribution at n1*n2/(n1+n2)";
    doc["ks_family_size"] = report.ks.size() / kAllMetrics.size();
    write_json_file(out_path(c, "summary.json"), doc);
  }
  write_manifest(c, methods,
                 {"metrics.csv", "similarity.csv", "ccdf.csv", "ks_table.csv", "trend.csv",
                  "summary.json"});
  out << "settings " << report.samples.size() << "\nsimilarity_rows " << report.similarity.size()
      << "\nks_rows " << report.ks.size() << '\n';
  return kOk;
}

int cmd_synth(RunConfig& c, std::ostream& out, std::ostream& err) {
  require(c.out_dir, "--out-dir", "synth writes the corpus there");
  auto& s = c.synth;
  if (c.follower_law == "lognormal") s.follower_law = FollowerLaw::LogNormal;
  else if (c.follower_law == "powerlaw") s.follower_law = FollowerLaw::PowerLaw;
  else throw UsageError("unknown --follower-law: " + c.follower_law);
  if (c.model == "pdi") s.model = AttachmentModel::Pdi;
  else if (c.model == "uniform") s.model = AttachmentModel::Uniform;
  else throw UsageError("unknown --model: " + c.model);
  if (c.gamma.size() != 1 || c.alpha.size() != 1)
    throw UsageError("synth takes exactly one --gamma and one --alpha");
  s.generative = PdiParams{c.gamma[0], c.alpha[0], c.delta_min};
  s.seed = c.seed;
  try {
    s.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (s.n_cascades == 0) err << "reshare: warning: n-cascades is 0; writing an empty corpus\n";

  const SynthCorpus corpus = generate_corpus(s, c.workers);
  prepare_out_dir(c);
  const auto cascades = corpus.corpus();
  {
    const auto path = out_path(c, "cascades.jsonl");
    auto f = open_out(path);
    write_cascades(f, cascades);
    close_out(f, path);
  }
  {
    const auto path = out_path(c, "followers.csv");
    auto f = open_out(path);
    write_follower_edges(f, corpus.followers);
    close_out(f, path);
  }
  {
    const auto path = out_path(c, "truth.jsonl");
    auto f = open_out(path);
    for (const auto& g : corpus.cascades) {
      f << "{\"cascade_id\":" << json_quote(g.truth.cascade_id) << ",\"parents\":[";
      for (std::size_t i = 0; i < g.truth.parents.size(); ++i)
        f << (i ? "," : "") << g.truth.parents[i];
      f << "]}\n";
    }
    close_out(f, path);
  }
  write_manifest(c, {}, {"cascades.jsonl", "followers.csv", "truth.jsonl"});

  std::size_t events = 0, largest = 0;
  std::set<std::string> users;
  for (const auto& cas : cascades) {
    events += cas.size();
    largest = std::max(largest, cas.size());
    for (const auto& e : cas.events) users.insert(e.user_id);
  }
  out << "cascades " << cascades.size() << "\nevents " << events << "\nusers " << users.size()
      << "\nmean_size "
      << format_real(cascades.empty() ? 0.0
                                      : static_cast<double>(events) / static_cast<double>(cascades.size()))
      << "\nmax_size " << largest << "\nfollower_edges " << corpus.followers.edge_count() << '\n';
  return kOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require(c.input, "--input", "validate needs a cascades file");
  const Inputs in = load_inputs(c, false, err);
  const auto& corpus = in.cascades.cascades;
  std::map<std::string_view, std::size_t> by_reason;
  for (const auto& r : in.cascades.rejections) ++by_reason[to_string(r.reason)];
  out << "records " << in.cascades.records << "\naccepted " << corpus.size() << "\nrejected "
      << in.cascades.rejections.size() << '\n';
  for (const auto& [reason, n] : by_reason) out << "rejected_" << reason << ' ' << n << '\n';
  out << "users " << in.profiles.size() << '\n';
  if (in.followers)
    out << "follower_edges " << in.followers->graph.edge_count() << "\nfollower_self_loops "
        << in.followers->self_loops_dropped << "\nfollower_duplicates "
        << in.followers->duplicates_dropped << "\nfollower_bad_rows "
        << in.followers->rejections.size() << '\n';

  std::size_t bad_trees = 0;
  if (!c.trees.empty()) {
    const CorpusIndex index(corpus);
    std::map<std::string, std::size_t> per_method;
    std::size_t line = 0;
    read_tree_records_file(c.trees, [&](TreeRecord&& r) {
      ++line;
      ++per_method[std::string(to_string(r.setting.method))];
      try {
        const auto pos = index.cascade(r.tree.cascade_id);
        if (r.tree.size() != corpus[pos].size())
          throw Error(ErrorCode::MismatchedCascade, "tree size differs from the cascade");
        check_tree(r.tree);
      } catch (const Error& e) {
        ++bad_trees;
        err << "reshare: trees line " << line << ": " << e.what() << '\n';
      }
    });
    out << "trees " << line << '\n';
    for (const auto& [m, n] : per_method) out << "trees_" << m << ' ' << n << '\n';
    out << "invalid_trees " << bad_trees << '\n';
  }
  if (!c.out_dir.empty()) {
    prepare_out_dir(c);
    const auto path = out_path(c, "rejections.jsonl");
    auto f = open_out(path);
    write_rejections(f, in.cascades.rejections);
    close_out(f, path);
    write_manifest(c, {}, {"rejections.jsonl"});
  }
  return bad_trees == 0 ? kOk : kData;
}

void add_shared(CLI::App* app, RunConfig& c, std::string& config_file) {
  app->add_option("--input", c.input, "Cascades file (JSON lines)");
  app->add_option("--followers", c.followers, "Follower edge list CSV");
  app->add_option("--out-dir", c.out_dir, "Output directory");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--workers", c.workers, "Worker threads");
  app->add_option("--config", config_file, "key = value file; its entries override flags");
  app->add_option("--isa", c.isa, "Force kernel set: scalar, avx2 or neon");
  app->add_flag("--quiet", c.quiet, "No progress or warnings on stderr");
}

void add_grid(CLI::App* app, RunConfig& c) {
  app->add_option("--gamma", c.gamma, "Followers weight (repeatable)")->delimiter(',');
  app->add_option("--alpha", c.alpha, "Recency exponent (repeatable)")->delimiter(',');
  app->add_option("--delta-min", c.delta_min, "Recency floor in seconds");
}

void add_reconstruction(CLI::App* app, RunConfig& c) {
  add_grid(app, c);
  app->add_option("--realizations", c.realizations, "PDI realizations per setting");
  app->add_option("--method", c.methods, "naive, tid or pdi (repeatable)")->delimiter(',');
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string config_file;
  CLI::App app{"Reshare cascade reconstruction and analysis", "reshare"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto* rec = app.add_subcommand("reconstruct", "Reconstruct cascade trees");
  add_shared(rec, c, config_file);
  add_reconstruction(rec, c);

  auto* inf = app.add_subcommand("influence", "Node strength shifts versus naive");
  add_shared(inf, c, config_file);
  add_reconstruction(inf, c);
  inf->add_option("--trees", c.trees, "Existing trees.jsonl (otherwise reconstruct in memory)");
  inf->add_option("--top-k", c.top_k, "Top-k fractions (repeatable)")->delimiter(',');
  inf->add_flag("--exclude-zero-strength", c.exclude_zero_strength,
                "Drop users with zero strength in both networks from rank correlations");

  auto* str = app.add_subcommand("structure", "Cascade structure comparisons");
  add_shared(str, c, config_file);
  add_reconstruction(str, c);
  str->add_option("--trees", c.trees, "Existing trees.jsonl (otherwise reconstruct in memory)");
  str->add_option("--bins", c.bins, "Size bins for the similarity trend");
  str->add_option("--bootstraps", c.bootstraps, "Bootstrap resamples per bin");

  auto* syn = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  add_shared(syn, c, config_file);
  add_grid(syn, c);
  auto& s = c.synth;
  syn->add_option("--n-cascades", s.n_cascades, "Number of cascades");
  syn->add_option("--n-users", s.n_users, "User pool size (0 picks a default)");
  syn->add_option("--size-exponent", s.size_exponent, "Cascade size power-law exponent");
  syn->add_option("--min-size", s.min_size, "Smallest cascade");
  syn->add_option("--max-size", s.max_size, "Largest cascade");
  syn->add_option("--follower-law", c.follower_law, "lognormal or powerlaw");
  syn->add_option("--follower-mu", s.follower_mu, "Lognormal mu");
  syn->add_option("--follower-sigma", s.follower_sigma, "Lognormal sigma");
  syn->add_option("--follower-exponent", s.follower_exponent, "Power-law exponent");
  syn->add_option("--follower-xmin", s.follower_xmin, "Power-law minimum");
  syn->add_option("--gap-exponent", s.gap_exponent, "Inter-event gap exponent");
  syn->add_option("--gap-min", s.gap_min, "Smallest gap in seconds");
  syn->add_option("--model", c.model, "pdi or uniform attachment");
  syn->add_option("--follow-probability", s.follow_probability, "Extra follow probability");

  auto* val = app.add_subcommand("validate", "Check inputs and report rejections");
  add_shared(val, c, config_file);
  val->add_option("--trees", c.trees, "trees.jsonl to check against the cascades");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "reshare: " << e.what() << '\n';
    return kUsage;
  }

  for (auto* sub : {rec, inf, str, syn, val})
    if (sub->parsed()) c.command = sub->get_name();
  if (!c.command.empty()) {
    auto* sub = app.get_subcommand(c.command);
    if (sub == rec || sub == inf || sub == str)
      c.realizations_set = sub->count("--realizations") > 0;
    if (sub == syn) {
      if (sub->count("--gamma") == 0) c.gamma = {0.5};
      if (sub->count("--alpha") == 0) c.alpha = {2.0};
    }
  }

  try {
    if (!config_file.empty()) apply_config_file(c, config_file);
    finalize(c, err);
    if (c.command == "reconstruct") return cmd_reconstruct(c, out, err);
    if (c.command == "influence") return cmd_influence(c, out, err);
    if (c.command == "structure") return cmd_structure(c, out, err);
    if (c.command == "synth") return cmd_synth(c, out, err);
    return cmd_validate(c, out, err);
  } catch (const UsageError& e) {
    err << "reshare: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "reshare: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "reshare: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace reshare::cli
