#include "bartsens/reduced_form.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace bartsens {

namespace {

constexpr char kMagic[8] = {'B', 'S', 'E', 'N', 'S', 'R', 'F', '\0'};
constexpr std::uint32_t kVersion = 1;

std::string now_string() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

template <typename T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
  std::uint64_t count = v.size();
  write_pod(out, count);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_vec(std::ifstream& in, std::vector<T>& v) {
  std::uint64_t count = 0;
  read_pod(in, count);
  v.resize(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
}

void write_string(std::ofstream& out, const std::string& s) {
  std::uint64_t count = s.size();
  write_pod(out, count);
  out.write(s.data(), static_cast<std::streamsize>(count));
}

std::string read_string(std::ifstream& in) {
  std::uint64_t count = 0;
  read_pod(in, count);
  std::string s(count, '\0');
  in.read(s.data(), static_cast<std::streamsize>(count));
  return s;
}

}  // namespace

ReducedFormDraws fit_reduced_form(const ObservationSet& data, const ReducedFormConfig& config) {
  config.bart.validate();
  const int n = data.n();
  if (n == 0) throw std::invalid_argument("fit_reduced_form: empty dataset");

  double g_mean = 0.0;
  for (std::int8_t v : data.G) g_mean += v;
  g_mean /= static_cast<double>(n);
  if (g_mean == 0.0 || g_mean == 1.0)
    emit_warning("fit_reduced_form: treatment arm is degenerate (all G identical)");

  std::vector<int> monitor;
  const int m = std::min(config.monitor_count, n);
  monitor.reserve(m);
  for (int k = 0; k < m; ++k)
    monitor.push_back(static_cast<int>(static_cast<long long>(k) * n / std::max(m, 1)));

  // Treatment and outcome chains are independent given distinct seeds from
  // the one master seed.
  ProbitFitDraws treatment = fit_probit_bart(data.X, data.G, config.bart, Matrix{},
                                             mix_seed(config.seed, 1), monitor);
  MonotoneFitDraws outcome =
      fit_monotone(data.X, data.G, data.B, config.bart, Matrix{}, mix_seed(config.seed, 2),
                   monitor);

  ReducedFormDraws out;
  out.n = n;
  out.kept_draws = config.bart.kept_draws;
  out.stored_draws = treatment.stored_draws;
  out.stride = treatment.stride;
  out.seed = config.seed;
  out.created = now_string();
  {
    nlohmann::json j;
    j["trees"] = config.bart.tree_count;
    j["burn_in"] = config.bart.burn_in;
    j["kept_draws"] = config.bart.kept_draws;
    j["cutpoints"] = config.bart.cutpoint_count;
    j["split_base"] = config.bart.split_base;
    j["split_power"] = config.bart.split_power;
    j["leaf_scale_k"] = config.bart.leaf_scale_k;
    j["min_leaf_obs"] = config.bart.min_leaf_obs;
    j["stored_draw_stride"] = config.bart.stored_draw_stride;
    j["monitor_count"] = m;
    out.config_json = j.dump();
  }
  out.G = data.G;
  out.B = data.B;
  out.labels = data.labels;
  out.mean_pG = std::move(treatment.mean_prob);
  out.mean_pB1 = std::move(outcome.pB1.mean_prob);
  out.mean_pB0 = std::move(outcome.pB0.mean_prob);
  out.draw_pG = std::move(treatment.draw_prob);
  out.draw_pB1 = std::move(outcome.pB1.draw_prob);
  out.draw_pB0 = std::move(outcome.pB0.draw_prob);
  out.monitor_rows = monitor;
  out.monitor_pG = std::move(treatment.monitor_prob);
  out.monitor_pB1 = std::move(outcome.pB1.monitor_prob);
  out.monitor_pB0 = std::move(outcome.pB0.monitor_prob);
  return out;
}

CellProbabilities cell_probabilities(double pG, double pB1, double pB0) {
  return {pG * pB1, (1.0 - pG) * pB0, pG * (1.0 - pB1)};
}

void save_reduced_form(const ReducedFormDraws& draws, const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_reduced_form: cannot open '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);

  nlohmann::json meta;
  meta["n"] = draws.n;
  meta["kept_draws"] = draws.kept_draws;
  meta["stored_draws"] = draws.stored_draws;
  meta["stride"] = draws.stride;
  meta["seed"] = draws.seed;
  meta["config"] = draws.config_json;
  meta["created"] = draws.created;
  write_string(out, meta.dump());

  write_vec(out, draws.G);
  write_vec(out, draws.B);
  std::uint64_t label_count = draws.labels.size();
  write_pod(out, label_count);
  for (const auto& s : draws.labels) write_string(out, s);
  write_vec(out, draws.mean_pG);
  write_vec(out, draws.mean_pB1);
  write_vec(out, draws.mean_pB0);
  write_vec(out, draws.draw_pG);
  write_vec(out, draws.draw_pB1);
  write_vec(out, draws.draw_pB0);
  write_vec(out, draws.monitor_rows);
  write_vec(out, draws.monitor_pG);
  write_vec(out, draws.monitor_pB1);
  write_vec(out, draws.monitor_pB0);
  if (!out) throw std::runtime_error("save_reduced_form: write failed for '" + path + "'");
}

ReducedFormDraws load_reduced_form(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_reduced_form: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_reduced_form: '" + path + "' is not a reduced-form artifact");
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion)
    throw std::runtime_error("load_reduced_form: artifact version " + std::to_string(version) +
                             " does not match expected " + std::to_string(kVersion));

  ReducedFormDraws d;
  nlohmann::json meta = nlohmann::json::parse(read_string(in));
  d.n = meta.at("n").get<int>();
  d.kept_draws = meta.at("kept_draws").get<int>();
  d.stored_draws = meta.at("stored_draws").get<int>();
  d.stride = meta.at("stride").get<int>();
  d.seed = meta.at("seed").get<std::uint64_t>();
  d.config_json = meta.at("config").get<std::string>();
  d.created = meta.at("created").get<std::string>();

  read_vec(in, d.G);
  read_vec(in, d.B);
  std::uint64_t label_count = 0;
  read_pod(in, label_count);
  d.labels.resize(label_count);
  for (auto& s : d.labels) s = read_string(in);
  read_vec(in, d.mean_pG);
  read_vec(in, d.mean_pB1);
  read_vec(in, d.mean_pB0);
  read_vec(in, d.draw_pG);
  read_vec(in, d.draw_pB1);
  read_vec(in, d.draw_pB0);
  read_vec(in, d.monitor_rows);
  read_vec(in, d.monitor_pG);
  read_vec(in, d.monitor_pB1);
  read_vec(in, d.monitor_pB0);
  if (!in) throw std::runtime_error("load_reduced_form: truncated artifact '" + path + "'");
  return d;
}

}  // namespace bartsens
